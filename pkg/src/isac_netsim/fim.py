"""Fisher information for AOA, TOF and hybrid multistatic localization.

Scalar builders take a :class:`NetworkRealization`; the ``*_batch`` variants
work on ``(trials, n)`` arrays and are what the Monte Carlo paths use.
Distances of ``inf`` (padding for Poisson clusters) contribute nothing.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from isac_netsim.geometry import DeploymentSpec, sample_batch
from isac_netsim.montecarlo import DEFAULT_CHUNK, mc_mean
from isac_netsim.params import (
    SINGULAR_REL_THRESHOLD,
    Fim2,
    McEstimate,
    NetworkRealization,
    SystemParams,
    trace_inverse,
    zeta_a_sq,
    zeta_r_sq,
)


class SensingMode(str, enum.Enum):
    AOA = "aoa"
    TOF = "tof"
    HYBRID = "hybrid"
    AOA_ORIENTED = "aoa_oriented"


def _mode(mode) -> SensingMode:
    return mode if isinstance(mode, SensingMode) else SensingMode(str(mode))


# -- per-link measurement model ---------------------------------------------

def link_snr(i: int, j: int, realization: NetworkRealization, params: SystemParams) -> float:
    """Echo SNR of the BS i -> target -> BS j link."""
    d = realization.distances
    return params.rcs_sigma * params.p_s * params.gamma_0 / (d[i] ** params.beta * d[j] ** params.beta)


def aoa_variance(i: int, j: int, realization: NetworkRealization, params: SystemParams) -> float:
    """Bearing error variance (rad^2); +inf when the array is end-fire (cos = 0)."""
    cos2 = math.cos(realization.bearings[i]) ** 2
    mr = params.m_r
    denom = math.pi ** 2 * cos2 * mr * (mr ** 2 - 1) * params.g_t * link_snr(i, j, realization, params)
    if denom <= 0 or cos2 < 1e-300:
        return math.inf
    return 6.0 / denom


def tof_variance(i: int, j: int, realization: NetworkRealization, params: SystemParams) -> float:
    """Bistatic range error variance (m^2)."""
    denom = 2.0 * math.pi ** 2 * params.g_t * params.m_r * params.bandwidth_b ** 2 \
        * link_snr(i, j, realization, params)
    if denom <= 0:
        return math.inf
    return 3.0 * params.speed_of_light_c ** 2 * params.noise_sigma_s2 / denom


# -- batch builders -------------------------------------------------------------

def fim_aoa_batch(d, theta, zeta_a2: float, beta: float):
    d = np.asarray(d, float)
    theta = np.asarray(theta, float)
    c, s = np.cos(theta), np.sin(theta)
    w_rx = (d ** -beta).sum(axis=-1)
    v = c * c * d ** (-beta - 2.0)
    k = zeta_a2 * w_rx
    return k * (v * s * s).sum(-1), -k * (v * s * c).sum(-1), k * (v * c * c).sum(-1)


def fim_tof_batch(d, theta, zeta_r2: float, beta: float):
    d = np.asarray(d, float)
    theta = np.asarray(theta, float)
    c, s = np.cos(theta), np.sin(theta)
    w = d ** -beta
    big_w = w.sum(-1)
    cw, sw = (w * c).sum(-1), (w * s).sum(-1)
    # sum_ij w_i w_j (x_i + x_j)(y_i + y_j) = 2 W sum_i w_i x_i y_i + 2 (sum w x)(sum w y)
    f11 = 2.0 * big_w * (w * c * c).sum(-1) + 2.0 * cw * cw
    f12 = 2.0 * big_w * (w * c * s).sum(-1) + 2.0 * cw * sw
    f22 = 2.0 * big_w * (w * s * s).sum(-1) + 2.0 * sw * sw
    return zeta_r2 * f11, zeta_r2 * f12, zeta_r2 * f22


def fim_batch(mode, d, theta, zeta_a2: float, zeta_r2: float, beta: float):
    mode = _mode(mode)
    if mode == SensingMode.AOA:
        return fim_aoa_batch(d, theta, zeta_a2, beta)
    if mode == SensingMode.TOF:
        return fim_tof_batch(d, theta, zeta_r2, beta)
    if mode == SensingMode.HYBRID:
        a = fim_aoa_batch(d, theta, zeta_a2, beta)
        r = fim_tof_batch(d, theta, zeta_r2, beta)
        return a[0] + r[0], a[1] + r[1], a[2] + r[2]
    raise ValueError("aoa_oriented applies to GDoP matrices only")


def gdop_batch(mode, theta):
    """Geometry-only (unit-distance, unit-gain) matrices for bearings ``theta``."""
    mode = _mode(mode)
    theta = np.asarray(theta, float)
    n = theta.shape[-1]
    ones = np.ones_like(theta)
    if mode == SensingMode.AOA:
        return fim_aoa_batch(ones, theta, 1.0, 0.0)
    if mode == SensingMode.TOF:
        return fim_tof_batch(ones, theta, 1.0, 0.0)
    if mode == SensingMode.HYBRID:
        a = fim_aoa_batch(ones, theta, 1.0, 0.0)
        r = fim_tof_batch(ones, theta, 1.0, 0.0)
        return a[0] + r[0], a[1] + r[1], a[2] + r[2]
    c, s = np.cos(theta), np.sin(theta)
    return n * (s * s).sum(-1), -n * (s * c).sum(-1), n * (c * c).sum(-1)


def trace_inverse_batch(f11, f12, f22) -> np.ndarray:
    f11, f12, f22 = (np.asarray(x, float) for x in (f11, f12, f22))
    tr = f11 + f22
    det = f11 * f22 - f12 * f12
    singular = (tr <= 0) | (det <= SINGULAR_REL_THRESHOLD * tr * tr)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = tr / det
    return np.where(singular, np.inf, out)


# -- scalar API ------------------------------------------------------------------

def _fim2(entries) -> Fim2:
    return Fim2(float(entries[0]), float(entries[1]), float(entries[2]))


def fim_aoa(realization: NetworkRealization, params: SystemParams) -> Fim2:
    return _fim2(fim_aoa_batch(realization.distances, realization.bearings,
                               zeta_a_sq(params), params.beta))


def fim_tof(realization: NetworkRealization, params: SystemParams) -> Fim2:
    return _fim2(fim_tof_batch(realization.distances, realization.bearings,
                               zeta_r_sq(params), params.beta))


def fim_hybrid(realization: NetworkRealization, params: SystemParams) -> Fim2:
    return fim_aoa(realization, params) + fim_tof(realization, params)


def fim(mode, realization: NetworkRealization, params: SystemParams) -> Fim2:
    mode = _mode(mode)
    return {SensingMode.AOA: fim_aoa, SensingMode.TOF: fim_tof,
            SensingMode.HYBRID: fim_hybrid}[mode](realization, params)


def gdop_matrix(mode, realization: NetworkRealization) -> Fim2:
    """Unit-distance geometry matrix; the realization's distances are ignored."""
    return _fim2(gdop_batch(mode, realization.bearings))


def single_bs_hybrid_trace_inverse(d: float, theta: float, zeta_a2: float, zeta_r2: float,
                                   beta: float) -> float:
    """tr(F_H^-1) for one BS: bearing (tangential) and range (radial) information add."""
    return d ** (2 * beta + 2) / (zeta_a2 * math.cos(theta) ** 2) + d ** (2 * beta) / (4.0 * zeta_r2)


# -- Monte Carlo -------------------------------------------------------------------

def mc_expected_crlb(mode, spec: DeploymentSpec, params: SystemParams, trials: int, seed: int,
                     *, threads: int | None = None, chunk: int = DEFAULT_CHUNK) -> McEstimate:
    """E[tr(F^-1)] over random deployments.

    Singular trials (rank-deficient FIM, empty clusters) are excluded from the
    mean and reported through ``McEstimate.singular``.
    """
    mode = _mode(mode)
    za, zr = zeta_a_sq(params), zeta_r_sq(params)

    def one_chunk(rng, size):
        d, theta, _ = sample_batch(spec, size, rng)
        return trace_inverse_batch(*fim_batch(mode, d, theta, za, zr, params.beta))

    return mc_mean(one_chunk, trials, seed, chunk=chunk, threads=threads)


def mc_expected_gdop(mode, n: int, trials: int, seed: int, *, threads: int | None = None,
                     chunk: int = DEFAULT_CHUNK) -> McEstimate:
    """E[tr(F~^-1)] with ``n`` i.i.d. uniform bearings."""
    mode = _mode(mode)

    def one_chunk(rng, size):
        theta = rng.uniform(0.0, 2.0 * math.pi, (size, n))
        return trace_inverse_batch(*gdop_batch(mode, theta))

    return mc_mean(one_chunk, trials, seed, chunk=chunk, threads=threads)


__all__ = [
    "SensingMode",
    "aoa_variance",
    "fim",
    "fim_aoa",
    "fim_aoa_batch",
    "fim_batch",
    "fim_hybrid",
    "fim_tof",
    "fim_tof_batch",
    "gdop_batch",
    "gdop_matrix",
    "link_snr",
    "mc_expected_crlb",
    "mc_expected_gdop",
    "single_bs_hybrid_trace_inverse",
    "tof_variance",
    "trace_inverse",
    "trace_inverse_batch",
]
