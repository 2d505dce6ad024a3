"""Closed-form GDoP and CRLB approximations and their large-N scaling laws.

All functions are pure. Cluster sizes below 2 (where AOA-only and TOF-only
localization is impossible) return ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special as sc

EULER_GAMMA_ROUNDED = 0.577  # value used by the hybrid pre-limit form
HARMONIC_EXACT_LIMIT = 1_000_000


# -- harmonic sums ---------------------------------------------------------------

def harmonic_asymptote(n: float, p: float) -> float:
    """Large-n approximation of sum_{k<=n} k^-p.

    p = 1: ln n + gamma + 1/(2n).  p != 1: Euler-Maclaurin with zeta(p).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if p == 1:
        return math.log(n) + np.euler_gamma + 1.0 / (2.0 * n)
    return float(sc.zeta(p)) + n ** (1.0 - p) / (1.0 - p) + 0.5 * n ** -p


def harmonic_sum(n: float, p: float) -> float:
    """sum_{k=1}^n k^-p, exact (correctly rounded) up to 10^6 terms."""
    if math.isinf(n):
        if p <= 1:
            return math.inf
        return float(sc.zeta(p))
    n = int(n)
    if n < 1:
        return 0.0
    if n > HARMONIC_EXACT_LIMIT:
        return harmonic_asymptote(n, p)
    k = np.arange(1, n + 1, dtype=float)
    return math.fsum(k ** -p)


# -- GDoP --------------------------------------------------------------------------

def gdop_aoa_closed(n: int) -> float:
    return 32.0 / (3.0 * n * (n - 1)) if n >= 2 else math.inf


def gdop_aoa_oriented_closed(n: int) -> float:
    return 4.0 / (n * n - n) if n >= 2 else math.inf


def gdop_tof_closed(n: int) -> float:
    return 2.0 / (n * (n - 1)) if n >= 2 else math.inf


def gdop_hybrid_closed(n: int) -> float:
    return 160.0 / (99.0 * n * n - 67.0) if n >= 2 else math.inf


GDOP_CLOSED = {
    "aoa": gdop_aoa_closed,
    "aoa_oriented": gdop_aoa_oriented_closed,
    "tof": gdop_tof_closed,
    "hybrid": gdop_hybrid_closed,
}


# -- CRLB with random distances ------------------------------------------------------

def crlb_aoa_closed(n: int, lambda_b: float, beta: float = 2.0, zeta_a_sq: float = 1.0) -> float:
    """Harmonic-sum AOA CRLB with E[d_i] ~ sqrt(i / (lambda_b pi)).

    32 S1 / (3 (lambda_b pi)^(beta+1) S0 (S1^2 - S2)) / zeta_a^2 with
    S1 = sum i^(-beta/2-1), S0 = sum k^(-beta/2), S2 = sum i^(-beta-2).
    """
    if n < 2:
        return math.inf
    s1 = harmonic_sum(n, beta / 2.0 + 1.0)
    s0 = harmonic_sum(n, beta / 2.0)
    s2 = harmonic_sum(n, beta + 2.0)
    return 32.0 * s1 / (3.0 * zeta_a_sq * (lambda_b * math.pi) ** (beta + 1.0) * s0 * (s1 * s1 - s2))


def crlb_aoa_expected_distance_form(n: int, lambda_b: float, beta: float = 2.0,
                                    zeta_a_sq: float = 1.0) -> float:
    """Same approximation, but with the exact order-statistic means E[d_i]."""
    if n < 2:
        return math.inf
    i = np.arange(1, n + 1, dtype=float)
    ed = np.exp(sc.gammaln(i + 0.5) - sc.gammaln(i)) / math.sqrt(lambda_b * math.pi)
    u = ed ** (-beta - 2.0)
    pair = 0.5 * (math.fsum(u) ** 2 - math.fsum(u * u))
    return 16.0 * math.fsum(u) / (3.0 * zeta_a_sq * math.fsum(ed ** -beta) * pair)


def crlb_aoa_scaling_constant(lambda_b: float, zeta_a_sq: float = 1.0) -> float:
    """lim CRLB_A * ln N = 320 / (3 zeta_a^2 lambda_b^3 pi^5)."""
    return 320.0 / (3.0 * zeta_a_sq * lambda_b ** 3 * math.pi ** 5)


def crlb_tof_scaling_constant(lambda_b: float, zeta_r_sq: float = 1.0) -> float:
    """lim CRLB_R * ln^2 N = 2 / (zeta_r^2 lambda_b^2 pi^2)."""
    return 2.0 / (zeta_r_sq * lambda_b ** 2 * math.pi ** 2)


def _hybrid_l(n: float) -> float:
    return math.log(n) + EULER_GAMMA_ROUNDED + 1.0 / (2.0 * n)


def crlb_hybrid_closed(n: int, lambda_b: float, zeta_a_sq: float = 1.0, zeta_r_sq: float = 1.0,
                       asymptotic: bool = False) -> float:
    """Hybrid CRLB.

    ``asymptotic=False``: pre-limit form in L = ln N + 0.577 + 1/(2N),
        (2 zr L + pi^3 lb za / 12) /
        (zr^2 pi^2 lb^2 L^3 + pi^8 lb^4 za^2 L / 1280 + pi^5 lb^3 zr za L^2 / 12).
    ``asymptotic=True``: 24 / (12 zr lb^2 pi^2 ln^2 N + lb^3 pi^5 za ln N).
    """
    if n < 2:
        return math.inf
    za, zr, lb = zeta_a_sq, zeta_r_sq, lambda_b
    pi = math.pi
    if asymptotic:
        ln = math.log(n)
        return 24.0 / (12.0 * zr * lb ** 2 * pi ** 2 * ln ** 2 + lb ** 3 * pi ** 5 * za * ln)
    big_l = _hybrid_l(n)
    num = 2.0 * zr * big_l + pi ** 3 * lb / 12.0 * za
    den = (zr ** 2 * pi ** 2 * lb ** 2 * big_l ** 3
           + pi ** 8 * lb ** 4 / 1280.0 * za ** 2 * big_l
           + pi ** 5 * lb ** 3 / 12.0 * zr * za * big_l ** 2)
    return num / den


def crlb_tof_closed(n: int, lambda_b: float, zeta_r_sq: float = 1.0) -> float:
    """TOF-only leading term 2 / (zeta_r^2 lambda_b^2 pi^2 L^2), the zero-AOA hybrid limit."""
    if n < 2:
        return math.inf
    return crlb_hybrid_closed(n, lambda_b, 0.0, zeta_r_sq)


# -- total-power-constrained forms -----------------------------------------------------

@dataclass(frozen=True)
class PowerConstrainedCrlb:
    value: float
    defined: bool
    receive_gain: float
    transmit_gain: float


def transmit_gain_floor(lambda_: float, d: float, n: int) -> int:
    """Antennas per BS when the budget lambda pi D^2 is split over n sites."""
    return int(math.floor(lambda_ * math.pi * d * d / n + 1e-9))


def _antenna_gains(n, lambda_t, lambda_r, d, floor):
    if floor:
        return float(transmit_gain_floor(lambda_r, d, n)), float(transmit_gain_floor(lambda_t, d, n))
    area = math.pi * d * d
    return lambda_r * area / n, lambda_t * area / n


def crlb_aoa_power_constrained(n: int, lambda_t: float, lambda_r: float, d: float,
                               zeta_a_tilde_sq: float, floor: bool = True) -> PowerConstrainedCrlb:
    """AOA CRLB when a fixed antenna budget in the disk of radius ``d`` is split over n BSs.

    (320/3) / (zt^2 g_r^3 g_t (N/(pi D^2))^3 pi^5 ln N); with ``floor=False``
    the gains are lambda pi D^2 / N and this reduces to
    320 N / (3 zt^2 lambda_r^3 lambda_t D^2 pi^6 ln N).
    """
    if n < 2:
        return PowerConstrainedCrlb(math.inf, False, math.nan, math.nan)
    g_r, g_t = _antenna_gains(n, lambda_t, lambda_r, d, floor)
    if g_r < 1 or g_t < 1:
        return PowerConstrainedCrlb(math.inf, False, g_r, g_t)
    geometry = (n / (math.pi * d * d)) ** 3 * math.pi ** 5 * math.log(n)
    value = (320.0 / 3.0) / (zeta_a_tilde_sq * g_r ** 3 * g_t * geometry)
    return PowerConstrainedCrlb(value, True, g_r, g_t)


def crlb_tof_power_constrained(n: int, lambda_t: float, lambda_r: float, d: float,
                               zeta_r_tilde_sq: float, floor: bool = True) -> PowerConstrainedCrlb:
    """TOF counterpart: 2 / (zt^2 g_r g_t (N/(pi D^2))^2 pi^2 ln^2 N).

    The smooth limit is 2 / (zt^2 lambda_r lambda_t pi^2 ln^2 N).
    """
    if n < 2:
        return PowerConstrainedCrlb(math.inf, False, math.nan, math.nan)
    g_r, g_t = _antenna_gains(n, lambda_t, lambda_r, d, floor)
    if g_r < 1 or g_t < 1:
        return PowerConstrainedCrlb(math.inf, False, g_r, g_t)
    geometry = (n / (math.pi * d * d)) ** 2 * math.pi ** 2 * math.log(n) ** 2
    value = 2.0 / (zeta_r_tilde_sq * g_r * g_t * geometry)
    return PowerConstrainedCrlb(value, True, g_r, g_t)


# -- scaling-law comparison --------------------------------------------------------------

@dataclass
class ScalingLawReport:
    """MC CRLB against a closed form over a grid of cluster sizes.

    ``converged`` is true when the MC values times the scaling factor vary by
    less than ``tolerance`` (relative) between the last two grid points.
    """

    n_grid: Sequence[int]
    mc_values: Sequence[float]
    closed_values: Sequence[float]
    limit_constant: float
    scaled_mc: Sequence[float] = field(default_factory=list)
    converged: bool = False
    tolerance: float = 0.15

    def __post_init__(self):
        if not (len(self.n_grid) == len(self.mc_values) == len(self.closed_values)):
            raise ValueError("grids must be aligned")
        if not math.isfinite(self.limit_constant):
            raise ValueError("limit constant must be finite")


def scaling_law_report(n_grid, mc_values, closed_values, limit_constant: float,
                       log_power: int, tolerance: float = 0.15) -> ScalingLawReport:
    scaled = [v * math.log(n) ** log_power for n, v in zip(n_grid, mc_values)]
    converged = False
    if len(scaled) >= 2 and all(math.isfinite(s) for s in scaled[-2:]):
        a, b = scaled[-2], scaled[-1]
        converged = abs(b - a) / abs(a) < tolerance
    return ScalingLawReport(list(n_grid), list(mc_values), list(closed_values), limit_constant,
                            scaled, converged, tolerance)


__all__ = [
    "EULER_GAMMA_ROUNDED",
    "GDOP_CLOSED",
    "PowerConstrainedCrlb",
    "ScalingLawReport",
    "crlb_aoa_closed",
    "crlb_aoa_expected_distance_form",
    "crlb_aoa_power_constrained",
    "crlb_aoa_scaling_constant",
    "crlb_hybrid_closed",
    "crlb_tof_closed",
    "crlb_tof_power_constrained",
    "crlb_tof_scaling_constant",
    "gdop_aoa_closed",
    "gdop_aoa_oriented_closed",
    "gdop_hybrid_closed",
    "gdop_tof_closed",
    "harmonic_asymptote",
    "harmonic_sum",
    "scaling_law_report",
    "transmit_gain_floor",
]
