"""Named experiments: each turns an :class:`ExperimentConfig` into result tables.

Tables are written as CSV (12 significant digits, locale independent) or
JSON, next to a ``manifest.json`` that records the config digest, seed and a
sha256 per output file. Numeric outputs depend only on config + seed.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import io
import itertools
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from isac_netsim import __version__
from isac_netsim import boundary as bd
from isac_netsim import closed_forms as cf
from isac_netsim.config import ExperimentConfig
from isac_netsim.fim import SensingMode, mc_expected_crlb, mc_expected_gdop
from isac_netsim.geometry import DeploymentSpec
from isac_netsim.params import m2_to_km2, zeta_a_sq, zeta_r_sq
from isac_netsim.rate import (
    DegenerateGainWarning,
    allocation_regime,
    closed_form_rate,
    default_epsilon,
    feasible_mt_grid,
    mc_rate,
    rate_optimal_mt,
)
from isac_netsim.special import QuadratureError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_NUMERICAL = 3

FORMATS = ("csv", "json")
_LN2 = math.log(2.0)


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"{self.name}: expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name):
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.12g" % v
    return str(v)


def table_to_csv(table: Table) -> str:
    buf = io.StringIO()
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(format_value(v) for v in row) + "\n")
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else format_value(v)
    return v


def table_to_json(table: Table) -> str:
    rows = [{c: _json_value(v) for c, v in zip(table.columns, r)} for r in table.rows]
    return json.dumps({"table": table.name, "columns": table.columns, "rows": rows},
                      indent=1, sort_keys=False) + "\n"


def gnuplot_script(table: Table, data_file: str) -> str:
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             f"set title '{table.name}'", f"set xlabel '{table.columns[0]}'"]
    numeric = [k for k, c in enumerate(table.columns[1:], start=2)
               if table.rows and isinstance(table.rows[0][k - 1], (int, float, np.number))]
    plots = [f"'{data_file}' using 1:{k} with linespoints" for k in numeric]
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def derive_seed(seed: int, *key: int) -> int:
    """Independent 64-bit seed for sweep point ``key`` under master ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class Context:
    cfg: ExperimentConfig
    threads: Optional[int]
    tables: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def table(self, name, columns) -> Table:
        t = Table(name, list(columns))
        self.tables.append(t)
        return t


def _sweep_points(cfg: ExperimentConfig):
    """Cartesian product over the optional outer sweep axes."""
    names = list(cfg.sweep)
    if not names:
        yield {}
        return
    for combo in itertools.product(*(cfg.sweep[n] for n in names)):
        yield dict(zip(names, combo))


def _base_params(cfg, extra):
    return cfg.system_params(**extra)


# -- experiments ------------------------------------------------------------------------

def exp_gdop_vs_n(ctx: Context):
    cfg, opts = ctx.cfg, ctx.cfg.resolved_options()
    axes = list(cfg.sweep)
    t = ctx.table("gdop_vs_n", axes + ["n", "mode", "mc_mean", "std_error", "closed",
                                       "singular_fraction"])
    for s_idx, extra in enumerate(_sweep_points(cfg)):
        for m_idx, mode in enumerate(opts["modes"]):
            for n in opts["n_values"]:
                est = mc_expected_gdop(mode, int(n), cfg.trials,
                                       derive_seed(cfg.seed, s_idx, m_idx, int(n)),
                                       threads=ctx.threads)
                t.add(*extra.values(), int(n), mode, est.mean, est.std_error,
                      cf.GDOP_CLOSED[mode](int(n)), est.singular_fraction)


def _closed_crlb(mode, n, p):
    za, zr = zeta_a_sq(p), zeta_r_sq(p)
    if mode == "aoa":
        return cf.crlb_aoa_closed(n, p.lambda_b, p.beta, za), cf.crlb_aoa_scaling_constant(p.lambda_b, za), 1
    if mode == "tof":
        return cf.crlb_tof_closed(n, p.lambda_b, zr), cf.crlb_tof_scaling_constant(p.lambda_b, zr), 2
    if mode == "hybrid":
        return cf.crlb_hybrid_closed(n, p.lambda_b, za, zr), cf.crlb_tof_scaling_constant(p.lambda_b, zr), 2
    raise ValueError(f"no CRLB closed form for mode {mode!r}")


def exp_crlb_scaling(ctx: Context):
    cfg, opts = ctx.cfg, ctx.cfg.resolved_options()
    axes = list(cfg.sweep)
    t = ctx.table("crlb_scaling", axes + ["n", "mode", "mc_mean", "std_error", "singular_fraction",
                                          "closed", "log_power", "scaled_mc", "limit_constant"])
    for s_idx, extra in enumerate(_sweep_points(cfg)):
        p = _base_params(cfg, extra)
        for m_idx, mode in enumerate(opts["modes"]):
            for n in opts["n_values"]:
                n = int(n)
                spec = DeploymentSpec.for_cluster(n, p.lambda_b, float(opts["exclusion_radius"]))
                est = mc_expected_crlb(mode, spec, p, cfg.trials,
                                       derive_seed(cfg.seed, s_idx, m_idx, n), threads=ctx.threads)
                closed, limit, k = _closed_crlb(mode, n, p)
                scaled = est.mean * math.log(n) ** k if n > 1 else math.nan
                t.add(*extra.values(), n, mode, est.mean, est.std_error, est.singular_fraction,
                      closed, k, scaled, limit)


def exp_crlb_vs_density(ctx: Context):
    cfg, opts = ctx.cfg, ctx.cfg.resolved_options()
    axes = list(cfg.sweep)
    t = ctx.table("crlb_vs_density", axes + ["power", "m_t", "m_r", "lambda_b_per_km2", "n", "mode",
                                             "crlb_closed", "mc_mean", "std_error",
                                             "singular_fraction"])
    for s_idx, extra in enumerate(_sweep_points(cfg)):
        base = _base_params(cfg, extra)
        for w_idx, power in enumerate(opts["power"]):
            for m_idx, mode in enumerate(opts["modes"]):
                for m_t in opts["m_t_values"]:
                    p = bd.point_params(base, int(m_t), None, 0.0, p_s=1.0, power=power)
                    n = bd.cluster_size(p)
                    closed = bd.crlb_closed(p, mode)
                    mean = se = frac = math.nan
                    if opts["mc"] and n >= 1:
                        spec = DeploymentSpec.for_cluster(n, p.lambda_b)
                        est = mc_expected_crlb(mode, spec, p, cfg.trials,
                                               derive_seed(cfg.seed, s_idx, w_idx, m_idx, int(m_t)),
                                               threads=ctx.threads)
                        mean, se, frac = est.mean, est.std_error, est.singular_fraction
                    t.add(*extra.values(), power, int(m_t), p.m_r, m2_to_km2(p.lambda_b), n, mode,
                          closed, mean, se, frac)


def exp_rate_vs_mt(ctx: Context):
    cfg, opts = ctx.cfg, ctx.cfg.resolved_options()
    axes = list(cfg.sweep)
    t = ctx.table("rate_vs_mt", axes + ["d", "m_t", "lambda_b_per_km2", "rate_closed_bits",
                                        "rate_mc_bits", "std_error_bits", "empty_fraction"])
    for s_idx, extra in enumerate(_sweep_points(cfg)):
        base = _base_params(cfg, extra)
        for d in opts["d_values"]:
            for m_t in opts["m_t_values"]:
                p = base.replace(coop_radius_d=float(d)).with_allocation(int(m_t))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", DegenerateGainWarning)
                    closed = closed_form_rate(p).rate_bits
                mean = se = empty = math.nan
                if opts["mc"]:
                    est = mc_rate(p, cfg.trials, derive_seed(cfg.seed, s_idx, int(d), int(m_t)),
                                  threads=ctx.threads)
                    mean, se, empty = est.mean / _LN2, est.std_error / _LN2, est.empty / est.trials
                t.add(*extra.values(), float(d), int(m_t), m2_to_km2(p.lambda_b), closed, mean, se,
                      empty)


def exp_alloc_vs_alpha(ctx: Context):
    cfg, opts = ctx.cfg, ctx.cfg.resolved_options()
    axes = list(cfg.sweep)
    summary = ctx.table("alloc_vs_alpha", axes + ["d", "alpha", "m_t_max", "epsilon", "g_regime",
                                                  "g_m_t_star", "rate_m_t_star",
                                                  "rate_optimal_fraction"])
    curves = ctx.table("alloc_vs_alpha_curves", axes + ["d", "alpha", "m_t", "g_value",
                                                        "rate_closed_bits"])
    for extra in _sweep_points(cfg):
        base = _base_params(cfg, extra)
        for d in opts["d_values"]:
            for alpha in opts["alpha_values"]:
                p = base.replace(coop_radius_d=float(d), alpha=float(alpha))
                eps = opts["epsilon"] if opts["epsilon"] is not None else default_epsilon(p)
                g = allocation_regime(p, feasible_mt_grid(p), eps)
                r = rate_optimal_mt(p)
                m_max = max(g.m_t_grid)
                summary.add(*extra.values(), float(d), float(alpha), m_max, eps, g.regime,
                            g.m_t_star, r.m_t_star, r.m_t_star / m_max)
                rate_by_m = dict(zip(r.m_t_grid, r.curve))
                for m, gv in zip(g.m_t_grid, g.curve):
                    curves.add(*extra.values(), float(d), float(alpha), m, gv,
                               rate_by_m.get(m, 0.0) / _LN2)


def exp_boundary(ctx: Context):
    cfg, opts = ctx.cfg, ctx.cfg.resolved_options()
    axes = list(cfg.sweep)
    t = ctx.table("boundary", axes + ["mode", "rate_bits", "crlb", "m_t", "m_r", "lambda_b_per_km2",
                                      "p_c", "p_s"])
    f = ctx.table("boundary_factors", axes + ["target_rate_bits", "mode", "best_crlb",
                                              "factor_vs_hybrid"])
    prune = opts["prune"] if opts["prune"] not in (None, "none") else None
    for extra in _sweep_points(cfg):
        base = _base_params(cfg, extra)
        best = {}
        for mode in opts["modes"]:
            fr = bd.pareto_frontier(opts["m_t_values"], opts["p_c_values"], base, mode,
                                    prune=prune, power=opts["power"])
            for pt in fr.points:
                t.add(*extra.values(), mode, pt.rate, pt.crlb, pt.m_t, pt.m_r,
                      m2_to_km2(pt.lambda_b), pt.p_c, pt.p_s)
            best[mode] = fr.best_crlb_at_rate(float(opts["target_rate_bits"]))
        ref = best.get("hybrid", math.nan)
        for mode in opts["modes"]:
            factor = best[mode] / ref if ref and math.isfinite(ref) else math.nan
            f.add(*extra.values(), float(opts["target_rate_bits"]), mode, best[mode], factor)


def exp_validate_formulas(ctx: Context):
    from isac_netsim.validation import run_checks

    cfg, opts = ctx.cfg, ctx.cfg.resolved_options()
    t = ctx.table("validate_formulas", ["check", "measured", "tolerance", "passed"])
    results = run_checks(cfg.seed, float(opts["tolerance_scale"]),
                         dominance_realizations=int(opts["dominance_realizations"]),
                         laplace_trials=int(opts["laplace_trials"]), threads=ctx.threads)
    for r in results:
        t.add(r.name, r.measured, r.tolerance, r.passed)
    failed = [r.name for r in results if not r.passed]
    ctx.summary["failed_checks"] = failed
    return EXIT_CHECK_FAILED if failed else EXIT_OK


RUNNERS: dict = {
    "gdop_vs_n": exp_gdop_vs_n,
    "crlb_scaling": exp_crlb_scaling,
    "crlb_vs_density": exp_crlb_vs_density,
    "rate_vs_mt": exp_rate_vs_mt,
    "alloc_vs_alpha": exp_alloc_vs_alpha,
    "boundary": exp_boundary,
    "validate_formulas": exp_validate_formulas,
}


# -- driver ------------------------------------------------------------------------------

@dataclass
class RunOutcome:
    status: int
    out_dir: str
    files: dict
    manifest: dict
    tables: list


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _write(path, text) -> str:
    data = text.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)
    return hashlib.sha256(data).hexdigest()


def run(cfg: ExperimentConfig, out_dir: Optional[str] = None, fmt: str = "csv",
        threads: Optional[int] = None, gnuplot: bool = False,
        runner: Optional[Callable] = None) -> RunOutcome:
    """Run one experiment and write its outputs plus ``manifest.json``."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    ctx = Context(cfg, threads)
    started = _now()
    status, error = EXIT_OK, None
    try:
        with np.errstate(all="ignore"):
            ret = (runner or RUNNERS[cfg.experiment])(ctx)
        if ret:
            status = int(ret)
    except (QuadratureError, ArithmeticError, FloatingPointError) as exc:
        status, error = EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}"

    files = {}
    for table in ctx.tables:
        name = f"{table.name}.{fmt}"
        text = table_to_csv(table) if fmt == "csv" else table_to_json(table)
        files[name] = _write(os.path.join(out_dir, name), text)
        if gnuplot and fmt == "csv":
            gp = f"{table.name}.gp"
            files[gp] = _write(os.path.join(out_dir, gp), gnuplot_script(table, name))

    manifest = {
        "tool": "isac-netsim",
        "version": __version__,
        "experiment": cfg.experiment,
        "config_hash": cfg.digest(),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "started_at": started,
        "finished_at": _now(),
        "status": status,
        "partial": status == EXIT_NUMERICAL,
        "error": error,
        "outputs": files,
        "summary": ctx.summary,
        "config": cfg.to_dict(),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return RunOutcome(status, out_dir, files, manifest, ctx.tables)


__all__ = [
    "EXIT_BAD_CONFIG",
    "EXIT_CHECK_FAILED",
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "FORMATS",
    "RUNNERS",
    "RunOutcome",
    "Table",
    "derive_seed",
    "format_value",
    "gnuplot_script",
    "run",
    "table_to_csv",
    "table_to_json",
]
