"""Incomplete Beta/Gamma functions and semi-infinite quadrature.

The incomplete functions are the *unregularized* ones used throughout the
rate analysis:

    B(a, b, c)    = int_0^a t^(b-1) (1-t)^(c-1) dt
    Bbar(a, b, c) = int_a^1 t^(b-1) (1-t)^(c-1) dt
    gamma(s, x)   = int_0^x t^(s-1) e^-t dt
    Gamma(s, x)   = int_x^inf t^(s-1) e^-t dt

Evaluation goes through ``scipy.special`` (continued fractions / series);
the defining integrals live in :mod:`isac_netsim.oracles` for testing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sc

TRANSFORM_NONE = "none"
TRANSFORM_LOG = "log_substitution"


class QuadratureError(ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    ``partial`` holds the best value obtained and ``abserr`` its error estimate.
    """

    def __init__(self, message: str, partial: float, abserr: float):
        super().__init__(message)
        self.partial = partial
        self.abserr = abserr


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 500
    transform: str = TRANSFORM_NONE

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.transform not in (TRANSFORM_NONE, TRANSFORM_LOG):
            raise ValueError(f"unknown transform {self.transform!r}")


# -- Beta ------------------------------------------------------------------------

def _check_beta_args(a, b, c):
    if not 0.0 <= a <= 1.0:
        raise ValueError("upper limit a must lie in [0, 1]")
    if b <= 0:
        raise ValueError("b <= 0: the integral diverges at t = 0")
    if c <= 0:
        raise ValueError("c <= 0: the integral diverges at t = 1")


def complete_beta(b: float, c: float) -> float:
    return float(sc.beta(b, c))


def lower_incomplete_beta(a: float, b: float, c: float) -> float:
    _check_beta_args(a, b, c)
    if a == 0.0:
        return 0.0
    return float(sc.betainc(b, c, a) * sc.beta(b, c))


def upper_incomplete_beta(a: float, b: float, c: float) -> float:
    _check_beta_args(a, b, c)
    if a == 1.0:
        return 0.0
    # betaincc avoids the 1 - I cancellation near a = 1
    return float(sc.betaincc(b, c, a) * sc.beta(b, c))


# -- Gamma -----------------------------------------------------------------------

def gamma_fn(x: float) -> float:
    return math.gamma(x)


def lower_incomplete_gamma(s: float, x: float) -> float:
    if s <= 0:
        raise ValueError("lower incomplete gamma needs s > 0")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        return 0.0
    return float(sc.gammainc(s, x) * sc.gamma(s))


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Gamma(s, x) for any real ``s`` and ``x > 0`` (``x >= 0`` when s > 0).

    Non-positive ``s`` uses the downward recurrence
    Gamma(s, x) = (Gamma(s+1, x) - x^s e^-x) / s, seeded by E1 at s = 0.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    if s > 0 and x == 0:
        return math.gamma(s)
    if s > 1e-14:
        return float(sc.gammaincc(s, x) * sc.gamma(s))
    if x == 0:
        return math.inf
    n_int = round(s)
    if abs(s - n_int) < 1e-14:
        cur, val = 0.0, float(sc.exp1(x))
        steps = -n_int
    else:
        steps = math.ceil(-s)
        cur = s + steps
        val = float(sc.gammaincc(cur, x) * sc.gamma(cur))
    log_x = math.log(x)
    for _ in range(steps):
        cur -= 1.0
        val = (val - math.exp(cur * log_x - x)) / cur
    return val


def gamma_integral(s: float, lo: float, hi: float) -> float:
    """int_lo^hi u^(s-1) e^-u du for any real ``s`` and 0 < lo <= hi."""
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    if s > 0:
        return float(sc.gamma(s) * (sc.gammainc(s, hi) - sc.gammainc(s, lo)))
    return upper_incomplete_gamma(s, lo) - upper_incomplete_gamma(s, hi)


# -- quadrature ------------------------------------------------------------------

def _quad(f, lo, hi, spec: QuadratureSpec, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        kw = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions,
                  full_output=1)
        if points is not None and math.isfinite(hi):
            kw["points"] = points
        out = integrate.quad(f, lo, hi, **kw)
    value, abserr = out[0], out[1]
    ok = len(out) == 3
    return value, abserr, ok


def integrate_semi_infinite(f, spec: QuadratureSpec = QuadratureSpec(), scale: float = 1.0):
    """int_0^inf f(z) dz; returns ``(value, abserr)``.

    With ``transform=log_substitution`` the integral is taken in u = ln z,
    i.e. int f(e^u) e^u du, which turns a 1/z endpoint behaviour into a
    bounded, exponentially decaying integrand. The u-axis is split into
    decades around ``ln(scale)`` (the integrand's characteristic size) so
    the adaptive rule sees every feature.

    Raises :class:`QuadratureError` (with the partial value) when the error
    estimate exceeds the requested tolerance.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    pieces = []
    if spec.transform == TRANSFORM_LOG:
        def g(u):
            if u < -700.0 or u > 700.0:
                return 0.0  # z underflows / overflows; integrand must vanish there
            z = math.exp(u)
            return f(z) * z

        c = math.log(scale)
        edges = [-math.inf] + [c + 2.302585092994046 * k for k in range(-12, 13, 2)] + [math.inf]
        for lo, hi in zip(edges[:-1], edges[1:]):
            pieces.append(_quad(g, lo, hi, spec))
    else:
        edges = [0.0, scale, math.inf]
        for lo, hi in zip(edges[:-1], edges[1:]):
            pieces.append(_quad(f, lo, hi, spec))
    value = math.fsum(p[0] for p in pieces)
    abserr = math.fsum(p[1] for p in pieces)
    converged = all(p[2] for p in pieces)
    if not converged or not math.isfinite(value) or abserr > max(spec.abs_tol, spec.rel_tol * abs(value)) * 10:
        raise QuadratureError(f"semi-infinite quadrature did not converge (estimate {value!r}, "
                              f"error {abserr!r})", value, abserr)
    return value, abserr


def integrate_finite(f, lo: float, hi: float, spec: QuadratureSpec = QuadratureSpec(), points=None):
    """int_lo^hi f; same error contract as :func:`integrate_semi_infinite`."""
    value, abserr, ok = _quad(f, lo, hi, spec, points)
    if not ok or not math.isfinite(value) or abserr > max(spec.abs_tol, spec.rel_tol * abs(value)) * 10:
        raise QuadratureError("finite quadrature did not converge", value, abserr)
    return value, abserr


def kahan_sum(values) -> float:
    """Exactly rounded sum (math.fsum); accepts any iterable or array."""
    return math.fsum(np.asarray(values, dtype=float).ravel())


__all__ = [
    "QuadratureError",
    "QuadratureSpec",
    "TRANSFORM_LOG",
    "TRANSFORM_NONE",
    "complete_beta",
    "gamma_fn",
    "gamma_integral",
    "integrate_finite",
    "integrate_semi_infinite",
    "kahan_sum",
    "lower_incomplete_beta",
    "lower_incomplete_gamma",
    "upper_incomplete_beta",
    "upper_incomplete_gamma",
]
