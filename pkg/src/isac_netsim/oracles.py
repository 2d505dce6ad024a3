"""Independent reference implementations used by tests and ``validate_formulas``.

Everything here is deliberately brute force: explicit Jacobian products,
quadrature of defining integrals, textbook series. None of it is used on the
production paths.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from isac_netsim.fim import aoa_variance, tof_variance
from isac_netsim.params import Fim2, NetworkRealization, SystemParams

_QUAD = dict(epsabs=0.0, epsrel=1e-13, limit=1000)


# -- FIM via J^T Sigma^-1 J ------------------------------------------------------

def aoa_link_normalization(params: SystemParams) -> float:
    """Constant k with F_A = k * J^T Sigma_A^-1 J when Sigma_A uses :func:`aoa_variance`.

    The per-link bearing variance is written without the noise power, so the
    summed FIM carries an extra 1 / sigma_s^2.
    """
    return 1.0 / params.noise_sigma_s2


def tof_link_normalization(params: SystemParams) -> float:
    """Constant k with F_R = k * J^T Sigma_R^-1 J when Sigma_R uses :func:`tof_variance`."""
    return 4.0


def jacobian_aoa(realization: NetworkRealization) -> np.ndarray:
    """(N^2, 2) stacked bearing Jacobian; row (i, j) is receiver i's gradient."""
    d, t = realization.distances, realization.bearings
    n = realization.n
    rows = np.empty((n * n, 2))
    for i in range(n):
        for j in range(n):
            rows[i * n + j] = (-math.sin(t[i]) / d[i], math.cos(t[i]) / d[i])
    return rows


def jacobian_tof(realization: NetworkRealization) -> np.ndarray:
    t = realization.bearings
    n = realization.n
    rows = np.empty((n * n, 2))
    for i in range(n):
        for j in range(n):
            rows[i * n + j] = (math.cos(t[i]) + math.cos(t[j]), math.sin(t[i]) + math.sin(t[j]))
    return rows


def _precision(var_fn, realization, params):
    n = realization.n
    prec = np.empty(n * n)
    for i in range(n):
        for j in range(n):
            v = var_fn(i, j, realization, params)
            prec[i * n + j] = 0.0 if math.isinf(v) else 1.0 / v
    return np.diag(prec)


def _to_fim2(m: np.ndarray) -> Fim2:
    return Fim2(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))


def jacobian_fim_aoa(realization: NetworkRealization, params: SystemParams) -> Fim2:
    j = jacobian_aoa(realization)
    m = j.T @ _precision(aoa_variance, realization, params) @ j
    return _to_fim2(aoa_link_normalization(params) * m)


def jacobian_fim_tof(realization: NetworkRealization, params: SystemParams) -> Fim2:
    j = jacobian_tof(realization)
    m = j.T @ _precision(tof_variance, realization, params) @ j
    return _to_fim2(tof_link_normalization(params) * m)


def inverse_trace(f: Fim2) -> float:
    """tr(F^-1) by general-purpose inversion."""
    return float(np.trace(np.linalg.inv(f.as_array())))


# -- special functions -------------------------------------------------------------

def quad_lower_incomplete_beta(a: float, b: float, c: float) -> float:
    if a == 0:
        return 0.0
    if a > 0.5:
        return quad_lower_incomplete_beta(0.5, b, c) + quad_upper_incomplete_beta(0.5, b, c) \
            - quad_upper_incomplete_beta(a, b, c)
    # t = a s^(1/b) removes the t^(b-1) endpoint singularity
    f = lambda s: (1.0 - a * s ** (1.0 / b)) ** (c - 1.0) * a ** b / b  # noqa: E731
    return integrate.quad(f, 0.0, 1.0, **_QUAD)[0]


def quad_upper_incomplete_beta(a: float, b: float, c: float) -> float:
    if a == 1:
        return 0.0
    # t = 1 - (1-a) s^(1/c) removes the (1-t)^(c-1) endpoint singularity
    h = 1.0 - a
    f = lambda s: (1.0 - h * s ** (1.0 / c)) ** (b - 1.0) * h ** c / c  # noqa: E731
    return integrate.quad(f, 0.0, 1.0, **_QUAD)[0]


def quad_upper_incomplete_gamma(s: float, x: float) -> float:
    return integrate.quad(lambda t: t ** (s - 1.0) * math.exp(-t), x, math.inf, **_QUAD)[0]


def quad_lower_incomplete_gamma(s: float, x: float) -> float:
    # t = u^(1/s): int_0^{x^s} e^{-u^(1/s)} du / s
    return integrate.quad(lambda u: math.exp(-u ** (1.0 / s)) / s, 0.0, x ** s, **_QUAD)[0]


def series_lower_gamma(s: float, x: float, max_terms: int = 100_000) -> float:
    """gamma(s, x) = x^s e^-x sum_k x^k / (s (s+1) ... (s+k))."""
    if x == 0:
        return 0.0
    term = 1.0 / s
    total = term
    for k in range(1, max_terms):
        term *= x / (s + k)
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return math.exp(s * math.log(x) - x) * total


def cf_upper_gamma(s: float, x: float, max_iter: int = 100_000) -> float:
    """Gamma(s, x) by the Legendre continued fraction (modified Lentz); good for x > s + 1."""
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(s * math.log(x) - x) * h


# -- Laplace-functional integrals ---------------------------------------------------

def radial_h1(x: float, k: float, alpha: float, d: float) -> float:
    """2 int_0^D (1 - (1 + x r^-alpha)^-k) r dr."""
    if x == 0:
        return 0.0
    f = lambda r: -math.expm1(-k * math.log1p(x * r ** -alpha)) * r if r > 0 else 0.0  # noqa: E731
    return 2.0 * integrate.quad(f, 0.0, d, **_QUAD)[0]


def radial_h2(x: float, alpha: float, d: float) -> float:
    """2 int_D^inf (1 - (1 + x r^-alpha)^-1) r dr."""
    if x == 0:
        return 0.0
    f = lambda r: r / (1.0 + r ** alpha / x)  # noqa: E731
    return 2.0 * integrate.quad(f, d, math.inf, **_QUAD)[0]


def harmonic_direct(n: int, p: float) -> float:
    return math.fsum(k ** -p for k in range(1, n + 1))


__all__ = [
    "aoa_link_normalization",
    "cf_upper_gamma",
    "harmonic_direct",
    "inverse_trace",
    "jacobian_aoa",
    "jacobian_fim_aoa",
    "jacobian_fim_tof",
    "jacobian_tof",
    "quad_lower_incomplete_beta",
    "quad_lower_incomplete_gamma",
    "quad_upper_incomplete_beta",
    "quad_upper_incomplete_gamma",
    "radial_h1",
    "radial_h2",
    "series_lower_gamma",
    "tof_link_normalization",
]
