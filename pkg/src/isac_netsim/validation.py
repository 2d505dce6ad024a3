"""Self-check suite behind the ``validate_formulas`` experiment.

Every check compares a production code path against an independent
reference (see :mod:`isac_netsim.oracles`) or against a closed form, and
reports the measured error next to its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from isac_netsim import oracles
from isac_netsim import special as sp
from isac_netsim.closed_forms import GDOP_CLOSED
from isac_netsim.fim import (
    fim_aoa,
    fim_aoa_batch,
    fim_tof,
    fim_tof_batch,
    mc_expected_gdop,
    trace_inverse_batch,
)
from isac_netsim.geometry import nth_nearest_mean_distance, sample_nth_nearest
from isac_netsim.montecarlo import substream
from isac_netsim.params import NetworkRealization, SystemParams, km2_to_m2
from isac_netsim.rate import laplace_interference, laplace_useful, mc_laplace


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.measured) and self.measured <= self.tolerance


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def random_instance(rng: np.random.Generator, n_min: int = 1, n_max: int = 20):
    """Random (realization, params) pair: log-uniform distances, uniform bearings."""
    n = int(rng.integers(n_min, n_max + 1))
    d = 10.0 ** rng.uniform(0.0, 3.0, n)
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    params = SystemParams(
        m_r=int(rng.integers(2, 33)),
        m_t=int(rng.integers(1, 17)),
        beta=float(rng.uniform(2.0, 4.0)),
        rcs_sigma=float(10.0 ** rng.uniform(-2, 2)),
        gamma_0=float(10.0 ** rng.uniform(-2, 2)),
        noise_sigma_s2=float(10.0 ** rng.uniform(-12, -8)),
        bandwidth_b=float(10.0 ** rng.uniform(6, 8)),
        g_t=float(rng.uniform(1.0, 16.0)),
        p_s=float(rng.uniform(0.05, 1.0)),
        p_c=0.0,
        power_mode="sweep",
        lambda_t=1.0,
        lambda_r=1.0,
    )
    return NetworkRealization(d, theta), params


def _fim_rel_error(a, b) -> float:
    x, y = a.as_array(), b.as_array()
    return float(np.max(np.abs(x - y)) / np.max(np.abs(y)))


def check_fim_oracle(seed: int, instances: int = 1000):
    rng = substream(seed, 1)
    worst_a = worst_r = 0.0
    for _ in range(instances):
        real, p = random_instance(rng)
        worst_a = max(worst_a, _fim_rel_error(fim_aoa(real, p), oracles.jacobian_fim_aoa(real, p)))
        worst_r = max(worst_r, _fim_rel_error(fim_tof(real, p), oracles.jacobian_fim_tof(real, p)))
    return worst_a, worst_r


def dominance_sweep(seed: int, realizations: int = 10_000):
    """Largest relative amount by which tr(F_H^-1) exceeds min(tr F_A^-1, tr F_R^-1).

    Returns ``(max_violation, violations, single_bs_failures)``; a single-BS
    failure is an N = 1 draw where the hybrid trace is infinite or either
    single-type trace is finite.
    """
    rng = substream(seed, 2)
    worst, count, single_fail = 0.0, 0, 0
    for _ in range(realizations):
        n = int(rng.integers(1, 21))
        d = rng.uniform(1.0, 100.0, (1, n))
        theta = rng.uniform(0.0, 2.0 * math.pi, (1, n))
        za, zr = 10.0 ** rng.uniform(-3, 3, 2)
        beta = float(rng.uniform(2.0, 4.0))
        fa = fim_aoa_batch(d, theta, za, beta)
        fr = fim_tof_batch(d, theta, zr, beta)
        ta = float(trace_inverse_batch(*fa)[0])
        tr = float(trace_inverse_batch(*fr)[0])
        th = float(trace_inverse_batch(*(x + y for x, y in zip(fa, fr)))[0])
        if n == 1 and (not math.isfinite(th) or math.isfinite(ta) or math.isfinite(tr)):
            single_fail += 1
        best = min(ta, tr)
        if math.isfinite(best):
            excess = (th - best) / best
            worst = max(worst, excess)
            if excess > 1e-9:
                count += 1
        elif not math.isfinite(th) and n > 1:
            count += 1
    return max(worst, 0.0), count, single_fail


def special_function_errors(seed: int, triples: int = 100):
    """Worst relative errors of the incomplete Beta/Gamma against quadrature and identities."""
    rng = substream(seed, 3)
    beta_q = gamma_q = beta_id = gamma_id = rec = 0.0
    for _ in range(triples):
        a = float(rng.uniform(0.0, 1.0))
        b = float(rng.uniform(0.1, 5.0))
        c = float(rng.uniform(0.1, 10.0))
        lo = sp.lower_incomplete_beta(a, b, c)
        hi = sp.upper_incomplete_beta(a, b, c)
        beta_q = max(beta_q, _rel(lo, oracles.quad_lower_incomplete_beta(a, b, c)),
                     _rel(hi, oracles.quad_upper_incomplete_beta(a, b, c)))
        beta_id = max(beta_id, _rel(lo + hi, sp.complete_beta(b, c)))

        s = float(rng.uniform(0.1, 8.0))
        x = float(rng.uniform(0.05, 20.0))
        g_lo = sp.lower_incomplete_gamma(s, x)
        g_hi = sp.upper_incomplete_gamma(s, x)
        gamma_q = max(gamma_q, _rel(g_lo, oracles.quad_lower_incomplete_gamma(s, x)),
                      _rel(g_hi, oracles.quad_upper_incomplete_gamma(s, x)))
        gamma_id = max(gamma_id, _rel(g_lo + g_hi, math.gamma(s)))

        s_neg = float(rng.uniform(-4.0, 0.0))
        x_pos = float(rng.uniform(0.1, 10.0))
        g_neg = sp.upper_incomplete_gamma(s_neg, x_pos)
        gamma_q = max(gamma_q, _rel(g_neg, oracles.quad_upper_incomplete_gamma(s_neg, x_pos)))
        # Gamma(s+1, x) = s Gamma(s, x) + x^s e^-x
        lhs = sp.upper_incomplete_gamma(s_neg + 1.0, x_pos)
        rhs = s_neg * g_neg + math.exp(s_neg * math.log(x_pos) - x_pos)
        rec = max(rec, abs(lhs - rhs) / max(abs(lhs), math.exp(s_neg * math.log(x_pos) - x_pos)))
    return {"beta_quadrature": beta_q, "gamma_quadrature": gamma_q,
            "beta_complement": beta_id, "gamma_complement": gamma_id, "gamma_recurrence": rec}


def laplace_preset() -> SystemParams:
    return SystemParams(lambda_t=km2_to_m2(50.0), m_t=4, coop_radius_d=100.0, alpha=4.0)


def laplace_errors(seed: int, trials: int, z_values=(0.1, 1.0, 10.0),
                   threads: Optional[int] = None):
    p = laplace_preset()
    useful, interf = mc_laplace(z_values, p, trials, seed, threads=threads)
    out = {}
    for z, u, i in zip(z_values, useful, interf):
        out[f"laplace_useful_z{z:g}"] = _rel(u.mean, laplace_useful(z, p))
        out[f"laplace_interference_z{z:g}"] = _rel(i.mean, laplace_interference(z, p))
    return out


def order_statistic_errors(seed: int, trials: int = 100_000, n_values=(1, 2, 3, 5)):
    lam = km2_to_m2(12.5)
    out = {}
    for n in n_values:
        d = sample_nth_nearest(n, lam, trials, substream(seed, 4, n))
        out[f"nth_nearest_mean_n{n}"] = _rel(float(np.mean(d)), nth_nearest_mean_distance(n, lam))
    return out


def gdop_errors(seed: int, trials: int = 100_000, n: int = 8,
                modes=("tof", "hybrid", "aoa_oriented"), threads: Optional[int] = None):
    out = {}
    for k, mode in enumerate(modes):
        est = mc_expected_gdop(mode, n, trials, seed + 17 * (k + 1), threads=threads)
        out[f"gdop_{mode}_n{n}"] = _rel(est.mean, GDOP_CLOSED[mode](n))
    return out


BASE_TOLERANCES = {
    "fim_aoa_vs_jacobian": 1e-12,
    "fim_tof_vs_jacobian": 1e-12,
    "dominance_max_violation": 1e-9,
    "dominance_violations": 0.0,
    "single_bs_hybrid_failures": 0.0,
    "beta_quadrature": 1e-8,
    "gamma_quadrature": 1e-8,
    "beta_complement": 1e-10,
    "gamma_complement": 1e-10,
    "gamma_recurrence": 1e-10,
    "laplace": 0.02,
    "nth_nearest": 0.01,
    "gdop": 0.10,
}


def _tolerance(name: str) -> float:
    if name in BASE_TOLERANCES:
        return BASE_TOLERANCES[name]
    for prefix in ("laplace", "nth_nearest", "gdop"):
        if name.startswith(prefix):
            return BASE_TOLERANCES[prefix]
    raise KeyError(name)


def run_checks(seed: int = 0, tolerance_scale: float = 1.0, *, dominance_realizations: int = 10_000,
               laplace_trials: int = 100_000, fim_instances: int = 1000,
               threads: Optional[int] = None) -> list:
    """Run every check; tolerances are multiplied by ``tolerance_scale``.

    Count-type checks (zero violations) keep a zero tolerance at any scale.
    """
    measured = {}
    measured["fim_aoa_vs_jacobian"], measured["fim_tof_vs_jacobian"] = \
        check_fim_oracle(seed, fim_instances)
    worst, count, single = dominance_sweep(seed, dominance_realizations)
    measured["dominance_max_violation"] = worst
    measured["dominance_violations"] = float(count)
    measured["single_bs_hybrid_failures"] = float(single)
    measured.update(special_function_errors(seed))
    measured.update(laplace_errors(seed, laplace_trials, threads=threads))
    measured.update(order_statistic_errors(seed))
    measured.update(gdop_errors(seed, threads=threads))
    return [CheckResult(k, float(v), _tolerance(k) * tolerance_scale) for k, v in measured.items()]


__all__ = [
    "BASE_TOLERANCES",
    "CheckResult",
    "check_fim_oracle",
    "gdop_errors",
    "laplace_errors",
    "laplace_preset",
    "dominance_sweep",
    "order_statistic_errors",
    "random_instance",
    "run_checks",
    "special_function_errors",
]
