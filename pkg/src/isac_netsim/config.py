"""Experiment configuration files.

A config is a YAML mapping::

    schema_version: 1
    experiment: rate_vs_mt
    seed: 7
    trials: 100000
    output_dir: out/rate
    params:            # SystemParams overrides; lambda_* in 1/km^2
      lambda_t: 300
      alpha: 4
    options:           # experiment-specific knobs (see EXPERIMENT_OPTIONS)
      d_values: [100, 125, 150]
    sweep:             # optional outer axes over SystemParams fields
      p_c: [0.5, 1.0]

Precedence: built-in defaults < config file < command-line flags.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field, fields
from typing import Any, Optional

import yaml

from isac_netsim.params import SystemParams, validate

SCHEMA_VERSION = 1

EXPERIMENTS = (
    "gdop_vs_n",
    "crlb_scaling",
    "crlb_vs_density",
    "rate_vs_mt",
    "alloc_vs_alpha",
    "boundary",
    "validate_formulas",
)

EXPERIMENT_OPTIONS = {
    "gdop_vs_n": {
        "n_values": list(range(2, 17)),
        "modes": ["aoa", "aoa_oriented", "tof", "hybrid"],
    },
    "crlb_scaling": {
        "n_values": [2, 4, 8, 12, 16, 32, 64, 128, 256],
        "modes": ["aoa", "tof", "hybrid"],
        "exclusion_radius": 1.0,
    },
    "crlb_vs_density": {
        "m_t_values": [1, 2, 3, 4, 5, 6, 8, 10, 12],
        "modes": ["aoa", "tof", "hybrid"],
        "power": ["per_bs", "per_antenna"],
        "mc": True,
    },
    "rate_vs_mt": {
        "d_values": [100, 125, 150],
        "m_t_values": list(range(2, 17)),
        "mc": True,
    },
    "alloc_vs_alpha": {
        "alpha_values": [2.1, 3, 4, 6, 8],
        "d_values": [100, 150, 200],
        "epsilon": None,
    },
    "boundary": {
        "m_t_values": list(range(1, 13)),
        "p_c_values": [round(0.05 * k, 10) for k in range(21)],
        "modes": ["aoa", "tof", "hybrid"],
        "prune": "per_power",
        "power": "per_bs",
        "target_rate_bits": 6.0,
    },
    "validate_formulas": {
        "tolerance_scale": 1.0,
        "dominance_realizations": 10_000,
        "laplace_trials": 100_000,
    },
}

_DENSITY_KEYS = ("lambda_t", "lambda_r", "lambda_b")
_PARAM_FIELDS = {f.name for f in fields(SystemParams)}


class ConfigError(ValueError):
    """Invalid configuration; ``diagnostics`` lists one message per problem."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)  # overrides, densities in 1/km^2
    options: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    trials: int = 20_000
    seed: int = 0
    output_dir: str = "out"
    schema_version: int = SCHEMA_VERSION

    def system_params(self, **extra) -> SystemParams:
        merged = dict(self.params)
        merged.update(extra)
        return SystemParams.from_km2(**merged)

    def resolved_options(self) -> dict:
        opts = copy.deepcopy(EXPERIMENT_OPTIONS[self.experiment])
        opts.update(self.options)
        return opts

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "params": self.params,
            "options": self.resolved_options(),
            "sweep": self.sweep,
            "trials": self.trials,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }

    def digest(self) -> str:
        """sha256 over everything that influences numeric outputs."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def _key_lines(text: str) -> dict:
    """Map dotted key paths to 1-based line numbers."""
    out = {}
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return out

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = f"{prefix}.{k.value}" if prefix else str(k.value)
                out[path] = k.start_mark.line + 1
                walk(v, path)

    if root is not None:
        walk(root, "")
    return out


def _where(lines, path):
    line = lines.get(path)
    return f"line {line}: {path}" if line else path


def parse_config(text: str, overrides: Optional[dict] = None, experiment: Optional[str] = None
                 ) -> ExperimentConfig:
    """Parse and validate config text; raises :class:`ConfigError` with diagnostics."""
    try:
        raw = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "config"
        raise ConfigError([f"{where}: YAML syntax error: {getattr(exc, 'problem', exc)}"]) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(["config: top level must be a mapping"])
    lines = _key_lines(text)
    return build_config(raw, overrides, experiment, lines)


def build_config(raw: dict, overrides: Optional[dict] = None, experiment: Optional[str] = None,
                 lines: Optional[dict] = None) -> ExperimentConfig:
    lines = lines or {}
    raw = dict(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = v
    if experiment is not None:
        if raw.get("experiment") not in (None, experiment):
            raise ConfigError([f"{_where(lines, 'experiment')}: config is for "
                               f"{raw.get('experiment')!r}, command asks for {experiment!r}"])
        raw["experiment"] = experiment

    errors = []
    known = {"schema_version", "experiment", "params", "options", "sweep", "trials", "seed",
             "output_dir"}
    for k in raw:
        if k not in known:
            errors.append(f"{_where(lines, k)}: unknown top-level key")

    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errors.append(f"{_where(lines, 'schema_version')}: unsupported schema_version {version!r}")

    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        errors.append(f"{_where(lines, 'experiment')}: experiment must be one of {list(EXPERIMENTS)}")
        raise ConfigError(errors)

    trials = raw.get("trials", 20_000)
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        errors.append(f"{_where(lines, 'trials')}: trials must be an integer >= 1")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        errors.append(f"{_where(lines, 'seed')}: seed must be an unsigned 64-bit integer")

    params = raw.get("params") or {}
    if not isinstance(params, dict):
        errors.append(f"{_where(lines, 'params')}: must be a mapping")
        params = {}
    for k in params:
        if k not in _PARAM_FIELDS:
            errors.append(f"{_where(lines, 'params.' + str(k))}: unknown parameter")

    options = raw.get("options") or {}
    if not isinstance(options, dict):
        errors.append(f"{_where(lines, 'options')}: must be a mapping")
        options = {}
    for k in options:
        if k not in EXPERIMENT_OPTIONS[exp]:
            errors.append(f"{_where(lines, 'options.' + str(k))}: unknown option for {exp}")

    sweep = raw.get("sweep") or {}
    if not isinstance(sweep, dict):
        errors.append(f"{_where(lines, 'sweep')}: must be a mapping of axis -> values")
        sweep = {}
    for k, v in sweep.items():
        if k not in _PARAM_FIELDS:
            errors.append(f"{_where(lines, 'sweep.' + str(k))}: sweep axis is not a parameter name")
        elif not isinstance(v, list) or not v:
            errors.append(f"{_where(lines, 'sweep.' + str(k))}: sweep values must be a non-empty list")

    if not errors:
        try:
            p = SystemParams.from_km2(**params)
        except (TypeError, ValueError) as exc:
            errors.append(f"{_where(lines, 'params')}: {exc}")
        else:
            for problem in validate(p):
                # allocation sweeps rederive lambda_b / m_r per point
                if exp in ("boundary", "crlb_vs_density", "rate_vs_mt", "alloc_vs_alpha") \
                        and problem.startswith("lambda_b * m_r"):
                    continue
                errors.append(f"{_where(lines, 'params')}: {problem}")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        experiment=exp,
        params=dict(params),
        options=dict(options),
        sweep={k: list(v) for k, v in sweep.items()},
        trials=int(trials),
        seed=int(seed),
        output_dir=str(raw.get("output_dir", "out")),
        schema_version=SCHEMA_VERSION,
    )


def load_config(path: str, overrides: Optional[dict] = None, experiment: Optional[str] = None
                ) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, overrides, experiment)


__all__ = [
    "ConfigError",
    "EXPERIMENTS",
    "EXPERIMENT_OPTIONS",
    "ExperimentConfig",
    "SCHEMA_VERSION",
    "build_config",
    "load_config",
    "parse_config",
]
