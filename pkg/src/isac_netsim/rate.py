"""Cooperative downlink rate in an interference-limited PPP network.

The typical user sits at the origin. BSs within ``coop_radius_d`` jointly
serve it (non-coherently, ZF toward the sensing beam) with gains
Gamma(M_t - 1, p_c); every other BS interferes with an Exp(1) gain.
Rates are in nats internally; :class:`RateResult` carries both units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from isac_netsim.geometry import annulus_radii
from isac_netsim.montecarlo import DEFAULT_CHUNK, map_chunks, reduce_values
from isac_netsim.params import McEstimate, SystemParams
from isac_netsim.special import (
    TRANSFORM_LOG,
    QuadratureSpec,
    gamma_integral,
    integrate_semi_infinite,
    lower_incomplete_beta,
    upper_incomplete_beta,
)

METHOD_MC = "mc"
METHOD_CLOSED = "closed_form"
METHOD_MEAN_SIR = "mean_sir_approx"

REGIME_CENTRALIZED = "centralized"
REGIME_DISTRIBUTED = "distributed"
REGIME_INTERIOR = "interior"

LN2 = math.log(2.0)


class DegenerateGainWarning(UserWarning):
    """M_t = 1: zero-forcing leaves no useful signal."""


@dataclass(frozen=True)
class RateResult:
    rate_nats: float
    method: str
    params_snapshot: dict = field(default_factory=dict, repr=False)
    std_error_nats: float = 0.0

    @property
    def rate_bits(self) -> float:
        return self.rate_nats / LN2


def _check_alpha(alpha: float):
    if alpha <= 2:
        raise ValueError("alpha <= 2: the interference integral diverges")


# -- sampling ----------------------------------------------------------------------

def useful_shape(params: SystemParams) -> int:
    return int(params.m_t) - 1


def sample_gains(n_coop: int, n_interf: int, params: SystemParams, rng: np.random.Generator):
    """Useful gains ~ Gamma(M_t - 1, p_c) and interference gains ~ Gamma(1, 1)."""
    k = useful_shape(params)
    if k <= 0:
        warnings.warn("m_t = 1 leaves no useful signal after zero-forcing; useful gains are 0",
                      DegenerateGainWarning, stacklevel=2)
        useful = np.zeros(n_coop)
    else:
        useful = rng.gamma(k, params.p_c, n_coop)
    return useful, rng.exponential(1.0, n_interf)


def truncation_radius(params: SystemParams) -> float:
    """Outer radius of the simulated interference field: max(10 D, 5 / sqrt(lambda_b))."""
    return max(10.0 * params.coop_radius_d, 5.0 / math.sqrt(params.lambda_b))


def interference_mean(params: SystemParams, r_in: float, r_out: float = math.inf) -> float:
    """E[sum g_j d_j^-alpha] over a PPP annulus, with E[g_j] = 1."""
    a = params.alpha
    _check_alpha(a)
    outer = 0.0 if math.isinf(r_out) else r_out ** (2.0 - a)
    return 2.0 * math.pi * params.lambda_b * (r_in ** (2.0 - a) - outer) / (a - 2.0)


def truncation_tail_fraction(params: SystemParams, r_max: Optional[float] = None) -> float:
    """Share of the mean interference that lies beyond ``r_max``."""
    r_max = truncation_radius(params) if r_max is None else r_max
    return interference_mean(params, r_max) / interference_mean(params, params.coop_radius_d)


def sample_fields(params: SystemParams, size: int, rng: np.random.Generator,
                  r_max: Optional[float] = None, tail_compensation: bool = True):
    """Draw ``size`` i.i.d. (U, I, n_coop) triples.

    U sums useful gains over the PPP in the disk of radius D, I sums
    interference over the annulus [D, r_max]. With ``tail_compensation`` the
    mean contribution from beyond r_max is added to I deterministically.
    """
    a, lam, d = params.alpha, params.lambda_b, params.coop_radius_d
    r_max = truncation_radius(params) if r_max is None else r_max

    n_c = rng.poisson(lam * math.pi * d * d, size)
    n_i = rng.poisson(lam * math.pi * (r_max * r_max - d * d), size)
    g_c, g_i = sample_gains(int(n_c.sum()), int(n_i.sum()), params, rng)

    r_c = annulus_radii(rng, g_c.size, 0.0, d)
    rows_c = np.repeat(np.arange(size), n_c)
    u = np.bincount(rows_c, g_c * r_c ** -a, minlength=size)

    r_i = annulus_radii(rng, g_i.size, d, r_max)
    rows_i = np.repeat(np.arange(size), n_i)
    interference = np.bincount(rows_i, g_i * r_i ** -a, minlength=size)
    if tail_compensation:
        interference += interference_mean(params, r_max)
    return u, interference, n_c


def mc_rate(params: SystemParams, trials: int, seed: int, *, r_max: Optional[float] = None,
            threads: Optional[int] = None, chunk: int = DEFAULT_CHUNK) -> McEstimate:
    """E[ln(1 + U / I)] in nats. Trials without cooperating BSs contribute 0."""
    _check_alpha(params.alpha)
    empty = []

    def one_chunk(rng, size):
        u, interference, n_c = sample_fields(params, size, rng, r_max)
        empty.append(int((n_c == 0).sum()))
        return np.log1p(u / interference)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGainWarning)
        chunks = map_chunks(one_chunk, trials, seed, chunk=chunk, threads=threads)
    est = reduce_values(chunks, trials, seed)
    return replace(est, empty=sum(empty))


def mc_laplace(z_values: Sequence[float], params: SystemParams, trials: int, seed: int, *,
               r_max: Optional[float] = None, threads: Optional[int] = None,
               chunk: int = DEFAULT_CHUNK):
    """MC estimates of E[exp(-z U)] and E[exp(-z I)] for each z.

    Returns ``(useful, interference)``, two lists of :class:`McEstimate`.
    """
    z = np.asarray(z_values, dtype=float)

    def one_chunk(rng, size):
        u, interference, _ = sample_fields(params, size, rng, r_max)
        return np.exp(-np.outer(u, z)), np.exp(-np.outer(interference, z))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGainWarning)
        chunks = map_chunks(one_chunk, trials, seed, chunk=chunk, threads=threads)
    useful = [reduce_values((c[0][:, k] for c in chunks), trials, seed) for k in range(z.size)]
    interf = [reduce_values((c[1][:, k] for c in chunks), trials, seed) for k in range(z.size)]
    return useful, interf


# -- Laplace transforms -------------------------------------------------------------

def h1(x: float, k: float, alpha: float, d: float) -> float:
    """Useful-field exponent: E[exp(-z U)] = exp(-pi lambda_b H1(z p_c, M_t - 1, alpha, D)).

    H1 = k x^(2/alpha) Bbar(x / (x + D^alpha), 1 - 2/alpha, k + 2/alpha)
         + D^2 (1 - (1 + x D^-alpha)^-k).
    """
    _check_alpha(alpha)
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0 or k == 0:
        return 0.0
    b = 1.0 - 2.0 / alpha
    y = x * d ** -alpha
    t = y / (1.0 + y)
    beta_term = k * x ** (2.0 / alpha) * upper_incomplete_beta(t, b, k + 2.0 / alpha)
    disk_term = -d * d * math.expm1(-k * math.log1p(y))
    return beta_term + disk_term


def h2(x: float, alpha: float, d: float) -> float:
    """Interference exponent: E[exp(-z I)] = exp(-pi lambda_b H2(z, alpha, D)).

    H2 = D^2 ((1 + x D^-alpha)^-1 - 1) + x^(2/alpha) B(x / (x + D^alpha), 1 - 2/alpha, 1 + 2/alpha).
    The first term is negative, the second positive; their sum is >= 0.
    """
    _check_alpha(alpha)
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        return 0.0
    y = x * d ** -alpha
    t = y / (1.0 + y)
    return -d * d * t + x ** (2.0 / alpha) * lower_incomplete_beta(t, 1.0 - 2.0 / alpha, 1.0 + 2.0 / alpha)


def laplace_useful(z: float, params: SystemParams) -> float:
    k = useful_shape(params)
    if k <= 0:
        return 1.0
    return math.exp(-math.pi * params.lambda_b * h1(z * params.p_c, k, params.alpha,
                                                   params.coop_radius_d))


def laplace_interference(z: float, params: SystemParams) -> float:
    return math.exp(-math.pi * params.lambda_b * h2(z, params.alpha, params.coop_radius_d))


def rate_integrand(z: float, params: SystemParams) -> float:
    """(1 - E[e^-zU]) E[e^-zI] / z; behaves like z^(2/alpha - 1) as z -> 0."""
    if z <= 0:
        raise ValueError("z must be > 0")
    lam_pi = math.pi * params.lambda_b
    a1 = lam_pi * h1(z * params.p_c, useful_shape(params), params.alpha, params.coop_radius_d)
    a2 = lam_pi * h2(z, params.alpha, params.coop_radius_d)
    return -math.expm1(-a1) * math.exp(-a2) / z


def rate_integrand_small_z(z: float, params: SystemParams) -> float:
    """Leading small-z behaviour of :func:`rate_integrand`.

    H1(x) ~ k x^(2/alpha) B(1 - 2/alpha, k + 2/alpha) as x -> 0, because the
    useful power has infinite mean (r^-alpha near the origin).
    """
    from scipy.special import beta as complete_beta

    a = params.alpha
    k = useful_shape(params)
    if k <= 0 or params.p_c == 0:
        return 0.0
    coef = math.pi * params.lambda_b * k * params.p_c ** (2.0 / a) \
        * complete_beta(1.0 - 2.0 / a, k + 2.0 / a)
    return coef * z ** (2.0 / a - 1.0)


def closed_form_rate(params: SystemParams, quad: Optional[QuadratureSpec] = None) -> RateResult:
    """Rate (nats) from int_0^inf (1 - E[e^-zU]) E[e^-zI] / z dz.

    Integrated in log z. Raises :class:`isac_netsim.special.QuadratureError`
    carrying the partial value if the quadrature does not converge.
    """
    _check_alpha(params.alpha)
    snapshot = params.to_dict()
    if useful_shape(params) <= 0:
        warnings.warn("m_t = 1 leaves no useful signal after zero-forcing; rate is 0",
                      DegenerateGainWarning, stacklevel=2)
        return RateResult(0.0, METHOD_CLOSED, snapshot)
    if params.p_c == 0:
        return RateResult(0.0, METHOD_CLOSED, snapshot)
    spec = quad or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-13, transform=TRANSFORM_LOG)
    if spec.transform != TRANSFORM_LOG:
        spec = replace(spec, transform=TRANSFORM_LOG)
    scale = params.coop_radius_d ** params.alpha
    value, _ = integrate_semi_infinite(lambda z: rate_integrand(z, params), spec, scale=scale)
    return RateResult(max(value, 0.0), METHOD_CLOSED, snapshot)


# -- mean-SIR allocation analysis ----------------------------------------------------------

def mean_sir_bar(r, params: SystemParams):
    """M_t (((alpha-2)/(pi lambda_b) r^-alpha + r^(2-alpha)) D^(alpha-2) - 1)."""
    a, lam, d = params.alpha, params.lambda_b, params.coop_radius_d
    _check_alpha(a)
    r = np.asarray(r, dtype=float)
    out = params.m_t * (((a - 2.0) / (math.pi * lam) * r ** -a + r ** (2.0 - a)) * d ** (a - 2.0) - 1.0)
    return float(out) if out.ndim == 0 else out


def default_epsilon(params: SystemParams) -> float:
    """10^-3 pi lambda_t D^2: the same lower limit for every m_t on a grid."""
    return 1e-3 * math.pi * params.lambda_t * params.coop_radius_d ** 2


G_INCOMPLETE_GAMMA = "incomplete_gamma"
G_QUADRATURE = "quadrature"
G_SMALL_EPSILON = "small_epsilon"


def g_of_mt(m_t: int, params: SystemParams, epsilon: Optional[float] = None,
            method: str = G_INCOMPLETE_GAMMA) -> float:
    """Expected mean SIR G(M_t) at lambda_b = lambda_t / M_t.

    G = M_t ((alpha-2) P int_eps^X u^(-alpha/2) e^-u du
             + P int_eps^X u^(1-alpha/2) e^-u du + e^-X - 1),
    X = pi lambda_b D^2, P = (pi lambda_b)^((alpha-2)/2) D^(alpha-2).

    ``method``: ``incomplete_gamma`` (default), ``quadrature`` (numerical
    integral of the same expression) or ``small_epsilon`` (the
    eps -> 0 power-law form, needs alpha > 4).
    """
    a, d = params.alpha, params.coop_radius_d
    _check_alpha(a)
    eps = default_epsilon(params) if epsilon is None else epsilon
    lam = params.lambda_t / m_t
    x = math.pi * lam * d * d
    if not 0 < eps < x:
        raise ValueError(f"epsilon must lie in (0, pi lambda_b D^2) = (0, {x:.6g})")
    pre = (math.pi * lam) ** ((a - 2.0) / 2.0) * d ** (a - 2.0)

    if method == G_SMALL_EPSILON:
        if a <= 4:
            raise ValueError("small-epsilon form needs alpha > 4")
        lt = params.lambda_t
        c0 = 2.0 * d ** (a - 2.0) * (math.pi * lt) ** ((a - 2.0) / 2.0) * eps ** (1.0 - a / 2.0) \
            * (1.0 + eps / (a - 4.0))
        return m_t * (c0 * m_t ** ((2.0 - a) / 2.0) + math.exp(-math.pi * lt * d * d / m_t) - 1.0)

    if method == G_QUADRATURE:
        from scipy import integrate

        i1 = integrate.quad(lambda u: u ** (-a / 2.0) * math.exp(-u), eps, x, limit=500,
                            epsabs=0.0, epsrel=1e-11)[0]
        i2 = integrate.quad(lambda u: u ** (1.0 - a / 2.0) * math.exp(-u), eps, x, limit=500,
                            epsabs=0.0, epsrel=1e-11)[0]
    elif method == G_INCOMPLETE_GAMMA:
        i1 = gamma_integral(1.0 - a / 2.0, eps, x)
        i2 = gamma_integral(2.0 - a / 2.0, eps, x)
    else:
        raise ValueError(f"unknown method {method!r}")
    return m_t * ((a - 2.0) * pre * i1 + pre * i2 + math.exp(-x) - 1.0)


def feasible_mt_grid(params: SystemParams, include_one: bool = True) -> list:
    """m_t = 1 .. floor(lambda_t pi D^2): at least one BS per cooperation disk on average."""
    top = int(math.floor(params.lambda_t * math.pi * params.coop_radius_d ** 2 + 1e-9))
    return list(range(1 if include_one else 2, top + 1))


@dataclass
class AllocationResult:
    regime: str
    m_t_star: int
    m_t_grid: list
    curve: list
    objective: str


def _classify(grid, curve, objective) -> AllocationResult:
    grid = list(grid)
    curve = [float(v) for v in curve]
    idx = int(np.argmax(curve))  # first maximum, i.e. ties -> smaller m_t
    star = grid[idx]
    if star == max(grid):
        regime = REGIME_CENTRALIZED
    elif star == min(grid):
        regime = REGIME_DISTRIBUTED
    else:
        regime = REGIME_INTERIOR
    return AllocationResult(regime, star, grid, curve, objective)


def allocation_regime(params: SystemParams, m_t_grid: Optional[Sequence[int]] = None,
                      epsilon: Optional[float] = None, method: str = G_INCOMPLETE_GAMMA
                      ) -> AllocationResult:
    """Argmax of G over ``m_t_grid`` (sorted ascending); ties go to the smaller m_t."""
    grid = sorted(m_t_grid) if m_t_grid is not None else feasible_mt_grid(params)
    eps = default_epsilon(params) if epsilon is None else epsilon
    curve = [g_of_mt(m, params, eps, method) for m in grid]
    return _classify(grid, curve, "mean_sir")


def rate_curve(params: SystemParams, m_t_grid: Sequence[int]) -> list:
    """Closed-form rate (nats) with the antenna budget spent on m_t-antenna sites."""
    out = []
    for m in m_t_grid:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateGainWarning)
            out.append(closed_form_rate(params.with_allocation(m)).rate_nats)
    return out


def rate_optimal_mt(params: SystemParams, m_t_grid: Optional[Sequence[int]] = None
                    ) -> AllocationResult:
    grid = sorted(m_t_grid) if m_t_grid is not None else feasible_mt_grid(params, include_one=False)
    return _classify(grid, rate_curve(params, grid), "closed_form_rate")


__all__ = [
    "AllocationResult",
    "DegenerateGainWarning",
    "RateResult",
    "allocation_regime",
    "closed_form_rate",
    "default_epsilon",
    "feasible_mt_grid",
    "g_of_mt",
    "h1",
    "h2",
    "interference_mean",
    "laplace_interference",
    "laplace_useful",
    "mc_laplace",
    "mc_rate",
    "mean_sir_bar",
    "rate_curve",
    "rate_integrand",
    "rate_integrand_small_z",
    "rate_optimal_mt",
    "sample_fields",
    "sample_gains",
    "truncation_radius",
    "truncation_tail_fraction",
    "useful_shape",
]
