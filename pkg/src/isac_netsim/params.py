"""Domain parameter types shared by every analysis module.

All lengths are meters and all densities are per square meter internally.
Configs speak km^-2; use :func:`km2_to_m2` (or ``SystemParams.from_km2``)
exactly once at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional, Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
KM2_PER_M2 = 1e-6

POWER_STRICT = "strict"
POWER_SWEEP = "sweep"

# |p_c + p_s - 1| below this counts as equality in strict mode
_POWER_TOL = 1e-12


def km2_to_m2(density_per_km2: float) -> float:
    return density_per_km2 * KM2_PER_M2


def m2_to_km2(density_per_m2: float) -> float:
    return density_per_m2 / KM2_PER_M2


@dataclass(frozen=True)
class SystemParams:
    """Physical and network constants of one ISAC deployment.

    Densities are in m^-2. ``lambda_b`` defaults to ``lambda_t / m_t`` (the
    full antenna budget spent on ``m_t``-antenna sites).
    """

    lambda_t: float = km2_to_m2(50.0)
    lambda_r: float = km2_to_m2(125.0)  # smallest budget with m_r = 10 at lambda_b = 12.5
    m_t: int = 4
    m_r: int = 10
    lambda_b: Optional[float] = None
    coop_radius_d: float = 100.0
    alpha: float = 4.0
    beta: float = 2.0
    p_c: float = 0.5
    p_s: float = 0.5
    rcs_sigma: float = 1.0
    gamma_0: float = 1.0
    noise_sigma_s2: float = 1e-10
    bandwidth_b: float = 10e6
    g_t: float = 1.0
    speed_of_light_c: float = SPEED_OF_LIGHT
    power_mode: str = POWER_STRICT

    def __post_init__(self):
        if self.lambda_b is None and self.m_t:
            object.__setattr__(self, "lambda_b", self.lambda_t / self.m_t)

    @classmethod
    def from_km2(cls, **kwargs) -> "SystemParams":
        """Build from a mapping whose ``lambda_*`` entries are per km^2."""
        for key in ("lambda_t", "lambda_r", "lambda_b"):
            if kwargs.get(key) is not None:
                kwargs[key] = km2_to_m2(float(kwargs[key]))
        return cls(**kwargs)

    def with_allocation(self, m_t: int, m_r: Optional[int] = None) -> "SystemParams":
        """Same antenna budget spent on ``m_t``-antenna sites (lambda_b = lambda_t / m_t)."""
        lam_b = self.lambda_t / m_t
        if m_r is None:
            m_r = max(1, int(math.floor(self.lambda_r / lam_b + 1e-9)))
        return replace(self, m_t=m_t, m_r=m_r, lambda_b=lam_b)

    def replace(self, **changes) -> "SystemParams":
        # lambda_b is derived unless given explicitly
        if "m_t" in changes or "lambda_t" in changes:
            changes.setdefault("lambda_b", None)
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def expected_coop_count(self) -> float:
        """Mean number of BSs inside the cooperation disk, lambda_b * pi * D^2."""
        return self.lambda_b * math.pi * self.coop_radius_d ** 2


def validate(params: SystemParams) -> list:
    """Return every violated invariant as a human-readable string.

    Never raises; an empty list means the parameters are usable.
    """
    out = []

    def num(name):
        v = getattr(params, name, None)
        try:
            v = float(v)
        except (TypeError, ValueError):
            out.append(f"{name} is not a number")
            return None
        if math.isnan(v):
            out.append(f"{name} is NaN")
            return None
        return v

    lt, lr, lb = num("lambda_t"), num("lambda_r"), num("lambda_b")
    mt, mr = num("m_t"), num("m_r")
    alpha, beta = num("alpha"), num("beta")
    pc, ps = num("p_c"), num("p_s")

    for name, v in (("lambda_t", lt), ("lambda_r", lr), ("lambda_b", lb)):
        if v is not None and v <= 0:
            out.append(f"{name} <= 0")
    for name, v in (("m_t", mt), ("m_r", mr)):
        if v is None:
            continue
        if v < 1:
            out.append(f"{name} < 1")
        elif v != int(v):
            out.append(f"{name} is not an integer")
    if alpha is not None and alpha < 2:
        out.append("alpha < 2")
    if beta is not None and beta < 2:
        out.append("beta < 2")
    for name, v in (("p_c", pc), ("p_s", ps)):
        if v is not None and not 0.0 <= v <= 1.0:
            out.append(f"{name} outside [0, 1]")
    if pc is not None and ps is not None:
        total = pc + ps
        if total > 1.0 + _POWER_TOL:
            out.append("p_c + p_s > 1")
        elif params.power_mode == POWER_STRICT and abs(total - 1.0) > _POWER_TOL:
            out.append("p_c + p_s != 1 (strict power mode)")
    if params.power_mode not in (POWER_STRICT, POWER_SWEEP):
        out.append(f"power_mode must be '{POWER_STRICT}' or '{POWER_SWEEP}'")
    if None not in (lb, mt, lt) and lb * mt > lt * (1 + 1e-9):
        out.append("lambda_b * m_t > lambda_t")
    if None not in (lb, mr, lr) and lb * mr > lr * (1 + 1e-9):
        out.append("lambda_b * m_r > lambda_r")
    for name in ("coop_radius_d", "rcs_sigma", "gamma_0", "noise_sigma_s2",
                 "bandwidth_b", "g_t", "speed_of_light_c"):
        v = num(name)
        if v is not None and v <= 0:
            out.append(f"{name} <= 0")
    return out


# -- sensing gain constants -------------------------------------------------

def zeta_a_sq(params: SystemParams) -> float:
    """AOA system gain |zeta_a|^2 (zero when m_r = 1 or p_s = 0)."""
    mr = params.m_r
    return (math.pi ** 2 / 6.0) * mr * (mr ** 2 - 1) * params.g_t * params.rcs_sigma \
        * params.p_s * params.gamma_0 / params.noise_sigma_s2


def zeta_r_sq(params: SystemParams) -> float:
    """TOF system gain |zeta_r|^2."""
    return 8.0 * math.pi ** 2 * params.p_s * params.g_t * params.m_r * params.bandwidth_b ** 2 \
        * params.rcs_sigma * params.gamma_0 / (3.0 * params.speed_of_light_c ** 2 * params.noise_sigma_s2)


def zeta_a_tilde_sq(params: SystemParams) -> float:
    """Array-free AOA gain used by the power-constrained CRLB."""
    return (math.pi ** 2 / 6.0) * params.rcs_sigma * params.p_s * params.gamma_0 / params.noise_sigma_s2


def zeta_r_tilde_sq(params: SystemParams) -> float:
    """Array-free TOF gain used by the power-constrained CRLB."""
    return 8.0 * math.pi ** 2 * params.p_s * params.bandwidth_b ** 2 * params.rcs_sigma * params.gamma_0 \
        / (params.speed_of_light_c ** 2 * params.noise_sigma_s2)


# -- value types ----------------------------------------------------------------

@dataclass(frozen=True)
class NetworkRealization:
    """Polar coordinates of the BSs around the target at the origin."""

    distances: np.ndarray
    bearings: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float).reshape(-1)
        t = np.asarray(self.bearings, dtype=float).reshape(-1)
        if d.shape != t.shape:
            raise ValueError("distances and bearings must have equal length")
        if np.any(d <= 0):
            raise ValueError("distances must be strictly positive")
        d.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "bearings", t)

    @property
    def n(self) -> int:
        return int(self.distances.size)

    @classmethod
    def from_lists(cls, distances: Sequence[float], bearings: Sequence[float]) -> "NetworkRealization":
        return cls(np.asarray(distances, float), np.asarray(bearings, float))


# relative det threshold below which a 2x2 FIM counts as singular
SINGULAR_REL_THRESHOLD = 1e-12


@dataclass(frozen=True)
class Fim2:
    """Symmetric 2x2 Fisher information matrix [[f11, f12], [f12, f22]]."""

    f11: float
    f12: float
    f22: float

    @property
    def trace(self) -> float:
        return self.f11 + self.f22

    @property
    def det(self) -> float:
        return self.f11 * self.f22 - self.f12 * self.f12

    def is_psd(self, tol: float = 1e-9) -> bool:
        scale = self.trace ** 2
        return self.f11 >= 0 and self.f22 >= 0 and self.det >= -tol * scale

    def trace_inverse(self) -> float:
        return trace_inverse(self)

    def __add__(self, other: "Fim2") -> "Fim2":
        return Fim2(self.f11 + other.f11, self.f12 + other.f12, self.f22 + other.f22)

    def scaled(self, k: float) -> "Fim2":
        return Fim2(k * self.f11, k * self.f12, k * self.f22)

    def as_array(self) -> np.ndarray:
        return np.array([[self.f11, self.f12], [self.f12, self.f22]])


def trace_inverse(f: Fim2) -> float:
    """tr(F^-1) of a 2x2 FIM; +inf when F is (numerically) singular."""
    tr = f.f11 + f.f22
    det = f.f11 * f.f22 - f.f12 * f.f12
    if tr <= 0 or det <= SINGULAR_REL_THRESHOLD * tr * tr:
        return math.inf
    return tr / det


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with its standard error.

    ``singular`` counts trials whose value was infinite/undefined; they are
    excluded from ``mean`` and ``std_error``. ``trials`` is the total number
    of trials drawn. ``empty`` counts trials with no cooperating BS (rate
    estimates only; those trials contribute 0 and stay in the mean).
    """

    mean: float
    std_error: float
    trials: int
    seed: int
    singular: int = 0
    empty: int = 0

    @property
    def singular_fraction(self) -> float:
        return self.singular / self.trials if self.trials else 0.0

    @property
    def defined(self) -> bool:
        return self.trials > self.singular and math.isfinite(self.mean)

    @property
    def rel_error(self) -> float:
        return self.std_error / abs(self.mean) if self.mean else math.inf


__all__ = [
    "SPEED_OF_LIGHT",
    "POWER_STRICT",
    "POWER_SWEEP",
    "SystemParams",
    "NetworkRealization",
    "Fim2",
    "McEstimate",
    "SINGULAR_REL_THRESHOLD",
    "km2_to_m2",
    "m2_to_km2",
    "trace_inverse",
    "validate",
    "zeta_a_sq",
    "zeta_r_sq",
    "zeta_a_tilde_sq",
    "zeta_r_tilde_sq",
]
