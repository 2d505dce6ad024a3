"""Command-line entry point: ``isac-netsim <experiment> [--config PATH] [flags]``.

Exit codes: 0 success, 1 a validation check failed, 2 invalid config,
3 numerical failure (partial outputs are flagged in the manifest).
"""

from __future__ import annotations

import argparse
import sys

from isac_netsim import __version__
from isac_netsim.config import EXPERIMENTS, ConfigError, build_config, load_config
from isac_netsim.experiments import EXIT_BAD_CONFIG, FORMATS, run
from isac_netsim.montecarlo import THREADS_ENV


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isac-netsim",
        description="Sensing/communication network experiments.",
        epilog=f"Thread count falls back to ${THREADS_ENV}. Flags override config values.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", metavar="PATH", help="YAML config file")
        p.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
        p.add_argument("--trials", type=_positive, help="Monte Carlo trials per point")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--threads", type=_positive, help=f"worker threads (default ${THREADS_ENV} or 1)")
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script per table")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "trials": args.trials, "output_dir": args.out}
    try:
        if args.config:
            cfg = load_config(args.config, overrides, args.experiment)
        else:
            cfg = build_config({}, overrides, args.experiment)
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    outcome = run(cfg, args.out or cfg.output_dir, args.format, args.threads, args.gnuplot)
    for name in outcome.files:
        print(f"{outcome.out_dir}/{name}")
    if outcome.manifest["error"]:
        print(f"numerical failure: {outcome.manifest['error']}", file=sys.stderr)
    failed = outcome.manifest["summary"].get("failed_checks")
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
