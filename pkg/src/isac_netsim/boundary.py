"""Rate-CRLB tradeoff over antenna-to-BS allocation and power split.

A grid point is ``(m_t, p_c)``; the BS density follows as lambda_b =
lambda_t / m_t, receive arrays take the remaining budget
(m_r = floor(lambda_r / lambda_b)) and p_s = 1 - p_c.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from isac_netsim import closed_forms as cf
from isac_netsim.fim import SensingMode, mc_expected_crlb
from isac_netsim.geometry import DeploymentSpec
from isac_netsim.params import POWER_STRICT, SystemParams, zeta_a_sq, zeta_r_sq
from isac_netsim.rate import DegenerateGainWarning, closed_form_rate, mc_rate

METHOD_CLOSED = "closed_form"
METHOD_MC = "mc"

POWER_PER_BS = "per_bs"  # every BS radiates P whatever its array size
POWER_PER_ANTENNA = "per_antenna"  # BS power grows as M_t * P

PRUNE_PER_POWER = "per_power"
PRUNE_FULL_POWER = "full_power"


class InfeasibleAllocation(ValueError):
    pass


@dataclass(frozen=True)
class OperatingPoint:
    m_t: int
    m_r: int
    lambda_b: float
    p_c: float
    p_s: float
    rate: float  # bits / s / Hz
    crlb: float  # m^2
    sensing_mode: SensingMode
    method: str = METHOD_CLOSED

    def dominates(self, other: "OperatingPoint") -> bool:
        return (self.rate >= other.rate and self.crlb <= other.crlb
                and (self.rate > other.rate or self.crlb < other.crlb))


@dataclass
class ParetoFrontier:
    """Non-dominated points sorted by rate ascending.

    Along the frontier a higher rate always costs localization accuracy, so
    ``crlb`` is strictly increasing with ``rate``.
    """

    points: list = field(default_factory=list)
    evaluated: int = 0

    def __len__(self):
        return len(self.points)

    def pairs(self):
        return [(p.rate, p.crlb) for p in self.points]

    def best_crlb_at_rate(self, rate: float) -> float:
        """Smallest frontier CRLB among points with rate >= ``rate`` (inf if none)."""
        ok = [p.crlb for p in self.points if p.rate >= rate]
        return min(ok) if ok else math.inf


def point_params(params: SystemParams, m_t: int, m_r: Optional[int], p_c: float,
                 p_s: Optional[float] = None, power: str = POWER_PER_BS) -> SystemParams:
    """Parameters of one grid point, with transmit beamforming gain G_t = m_t."""
    lam_b = params.lambda_t / m_t
    if m_r is None:
        m_r = int(math.floor(params.lambda_r / lam_b + 1e-9))
    if m_r < 1 or m_r * lam_b > params.lambda_r * (1 + 1e-9):
        raise InfeasibleAllocation(f"m_r={m_r} exceeds the receive antenna budget at m_t={m_t}")
    if p_s is None:
        p_s = 1.0 - p_c if params.power_mode == POWER_STRICT else params.p_s
    if p_c + p_s > 1.0 + 1e-12:
        raise InfeasibleAllocation("p_c + p_s > 1")
    g_t = float(m_t)
    if power == POWER_PER_ANTENNA:
        g_t *= m_t
    elif power != POWER_PER_BS:
        raise ValueError(f"unknown power scaling {power!r}")
    return params.replace(m_t=m_t, m_r=m_r, lambda_b=lam_b, p_c=p_c, p_s=max(p_s, 0.0), g_t=g_t)


def cluster_size(p: SystemParams) -> int:
    return int(round(p.lambda_b * math.pi * p.coop_radius_d ** 2))


def crlb_closed(p: SystemParams, mode) -> float:
    mode = SensingMode(mode)
    n = cluster_size(p)
    za, zr = zeta_a_sq(p), zeta_r_sq(p)
    if n < 2 or (mode == SensingMode.AOA and za == 0) or (mode == SensingMode.TOF and zr == 0):
        return math.inf
    if mode == SensingMode.AOA:
        return cf.crlb_aoa_closed(n, p.lambda_b, p.beta, za)
    if mode == SensingMode.TOF:
        return cf.crlb_tof_closed(n, p.lambda_b, zr)
    if mode == SensingMode.HYBRID:
        if za == 0 and zr == 0:
            return math.inf
        return cf.crlb_hybrid_closed(n, p.lambda_b, za, zr)
    raise ValueError(f"mode {mode} has no CRLB")


def crlb_mc(p: SystemParams, mode, trials: int, seed: int) -> float:
    n = cluster_size(p)
    if n < 1 or p.p_s == 0:
        return math.inf
    spec = DeploymentSpec.for_cluster(n, p.lambda_b)
    est = mc_expected_crlb(mode, spec, p, trials, seed)
    return est.mean if est.defined else math.inf


def evaluate_point(m_t: int, m_r: Optional[int], p_c: float, params: SystemParams, mode,
                   method: str = METHOD_CLOSED, *, power: str = POWER_PER_BS,
                   trials: int = 20_000, seed: int = 0) -> OperatingPoint:
    p = point_params(params, m_t, m_r, p_c, power=power)
    mode = SensingMode(mode)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGainWarning)
        if method == METHOD_CLOSED:
            rate = closed_form_rate(p).rate_bits if p_c > 0 else 0.0
            crlb = crlb_closed(p, mode)
        elif method == METHOD_MC:
            rate = mc_rate(p, trials, seed).mean / math.log(2.0) if p_c > 0 else 0.0
            crlb = crlb_mc(p, mode, trials, seed)
        else:
            raise ValueError(f"unknown method {method!r}")
    return OperatingPoint(m_t, p.m_r, p.lambda_b, p_c, p.p_s, rate, crlb, mode, method)


def non_dominated(points: Sequence[OperatingPoint]) -> ParetoFrontier:
    """Maximize rate, minimize CRLB; exact duplicates keep the first occurrence.

    The highest-rate point is always kept, even with an infinite CRLB.
    """
    order = sorted(range(len(points)), key=lambda k: (-points[k].rate, points[k].crlb, k))
    kept = []
    best = math.inf
    for k in order:
        p = points[k]
        if not kept or p.crlb < best:
            kept.append(p)
            best = p.crlb
    kept.reverse()
    return ParetoFrontier(kept, len(points))


class _Evaluator:
    """Memoized evaluate_point over one (params, mode, method) context."""

    def __init__(self, params, mode, method, power, trials, seed):
        self.params, self.mode, self.method = params, mode, method
        self.power, self.trials, self.seed = power, trials, seed
        self.cache = {}

    def __call__(self, m_t, p_c):
        key = (m_t, float(p_c))
        if key not in self.cache:
            self.cache[key] = evaluate_point(m_t, None, p_c, self.params, self.mode, self.method,
                                             power=self.power, trials=self.trials, seed=self.seed)
        return self.cache[key]


def _argbest(values, maximize):
    arr = np.asarray(values, dtype=float)
    return int(np.argmax(arr) if maximize else np.argmin(arr))


def _hill_climb(f, size: int, start: int) -> int:
    """Index of the maximum of a unimodal sequence, walking uphill from ``start``.

    Ties resolve toward the smaller index, matching ``np.argmax``.
    """
    k = start
    while k > 0 and f(k - 1) >= f(k):
        k -= 1
    while k + 1 < size and f(k + 1) > f(k):
        k += 1
    return k


def pareto_frontier(m_t_grid: Sequence[int], p_c_grid: Sequence[float], params: SystemParams,
                    mode, *, prune: Optional[str] = None, method: str = METHOD_CLOSED,
                    power: str = POWER_PER_BS, trials: int = 20_000, seed: int = 0
                    ) -> ParetoFrontier:
    """Non-dominated (rate, CRLB) pairs over the (m_t, p_c) grid.

    ``prune=None`` evaluates every grid point. ``prune="per_power"`` keeps,
    for each p_c, only densities between the rate-optimal density at that
    p_c and the CRLB-optimal density (which does not depend on the power
    split); the per-row rate optimum is found by hill climbing, which
    assumes the rate is unimodal in m_t. ``prune="full_power"`` uses the rate optimum at p_c = 1 for
    every row instead.
    """
    m_t_grid = sorted(int(m) for m in m_t_grid)
    p_c_grid = [float(v) for v in p_c_grid]
    if not m_t_grid or not p_c_grid:
        raise ValueError("empty grid")
    ev = _Evaluator(params, mode, method, power, trials, seed)

    if prune is None:
        pts = [ev(m, pc) for m in m_t_grid for pc in p_c_grid]
        return non_dominated(pts)

    # CRLB scales as 1/p_s, so its argmin over m_t is the same for every p_s > 0
    s_idx = _argbest([ev(m, 0.0).crlb for m in m_t_grid], maximize=False)
    full_c_idx = _argbest([ev(m, 1.0).rate for m in m_t_grid], maximize=True)
    c_start = full_c_idx
    pts = []
    for pc in p_c_grid:
        if prune == PRUNE_PER_POWER:
            if pc > 0:
                c_idx = _hill_climb(lambda k: ev(m_t_grid[k], pc).rate, len(m_t_grid), c_start)
                c_start = c_idx
            else:
                c_idx = s_idx  # zero rate everywhere: only the CRLB optimum survives
        elif prune == PRUNE_FULL_POWER:
            c_idx = full_c_idx
        else:
            raise ValueError(f"unknown prune mode {prune!r}")
        lo, hi = min(c_idx, s_idx), max(c_idx, s_idx)
        pts.extend(ev(m, pc) for m in m_t_grid[lo:hi + 1])
    frontier = non_dominated(pts)
    frontier.evaluated = len(ev.cache)
    return frontier


def single_objective_optima(params: SystemParams, mode, m_t_grid: Sequence[int], *,
                            method: str = METHOD_CLOSED, power: str = POWER_PER_BS,
                            trials: int = 20_000, seed: int = 0):
    """(lambda_b*(c), lambda_b*(s)): rate-optimal density at p_c = 1 and CRLB-optimal at p_s = 1."""
    m_t_grid = sorted(int(m) for m in m_t_grid)
    ev = _Evaluator(params, mode, method, power, trials, seed)
    rates = [ev(m, 1.0).rate for m in m_t_grid]
    crlbs = [ev(m, 0.0).crlb for m in m_t_grid]
    m_c = m_t_grid[_argbest(rates, True)]
    m_s = m_t_grid[_argbest(crlbs, False)]
    return params.lambda_t / m_c, params.lambda_t / m_s


def crlb_vs_density(params: SystemParams, mode, m_t_grid: Sequence[int],
                    power: str = POWER_PER_BS, method: str = METHOD_CLOSED,
                    trials: int = 20_000, seed: int = 0):
    """CRLB with all power on sensing for each m_t; returns a list of OperatingPoints."""
    ev = _Evaluator(params, mode, method, power, trials, seed)
    return [ev(int(m), 0.0) for m in sorted(m_t_grid)]


__all__ = [
    "InfeasibleAllocation",
    "OperatingPoint",
    "ParetoFrontier",
    "POWER_PER_ANTENNA",
    "POWER_PER_BS",
    "PRUNE_FULL_POWER",
    "PRUNE_PER_POWER",
    "cluster_size",
    "crlb_closed",
    "crlb_mc",
    "crlb_vs_density",
    "evaluate_point",
    "non_dominated",
    "pareto_frontier",
    "point_params",
    "single_objective_optima",
]
