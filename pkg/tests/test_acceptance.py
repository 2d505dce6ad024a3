"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line (listed again at the end of the
pytest run) before asserting. Tolerances are the contract values.
"""

import math
import time

import numpy as np
import pytest

from isac_netsim import boundary as bd
from isac_netsim import closed_forms as cf
from isac_netsim import rate
from isac_netsim import validation
from isac_netsim.experiments import run
from isac_netsim.config import parse_config
from isac_netsim.fim import mc_expected_crlb, mc_expected_gdop
from isac_netsim.geometry import DeploymentSpec, nth_nearest_mean_distance, sample_nth_nearest
from isac_netsim.montecarlo import substream
from isac_netsim.params import SystemParams, km2_to_m2, zeta_a_sq, zeta_r_sq

SEED = 20240601


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_gdop_closed_forms(acceptance):
    start = time.perf_counter()
    bad, worst = [], {}
    for k, mode in enumerate(("aoa", "tof", "hybrid")):
        for n in (4, 6, 8, 12, 16):
            est = mc_expected_gdop(mode, n, 100_000, SEED + 100 * k + n)
            err = _rel(est.mean, cf.GDOP_CLOSED[mode](n))
            worst[mode] = max(worst.get(mode, 0.0), err)
            if err > 0.10:
                bad.append(f"{mode}@N={n}:{err:.2f}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 120
    detail = ", ".join(f"{m} max rel err {e:.3f}" for m, e in worst.items())
    acceptance(1, ok, f"{detail}; {elapsed:.1f}s; over 10%: {bad or 'none'}")
    assert ok


def test_criterion_02_orientation_gain(acceptance):
    ratios = {}
    for n in (4, 8):
        a = mc_expected_gdop("aoa", n, 100_000, SEED + n).mean
        ao = mc_expected_gdop("aoa_oriented", n, 100_000, SEED + 50 + n).mean
        ratios[n] = a / ao
    ok = all(abs(r / (8 / 3) - 1) <= 0.10 for r in ratios.values())
    acceptance(2, ok, "MC GDoP ratio " + ", ".join(f"N={n}: {r:.3f}" for n, r in ratios.items())
               + f" (target {8 / 3:.3f} +/- 10%)")
    assert ok


def test_criterion_03_hybrid_dominance(acceptance):
    worst, violations, single_failures = validation.dominance_sweep(SEED, 10_000)
    # single BS with the default physical gains
    p = SystemParams()
    spec = DeploymentSpec.for_cluster(1, p.lambda_b)
    hybrid = mc_expected_crlb("hybrid", spec, p, 10_000, SEED).singular_fraction
    single = [mc_expected_crlb(m, spec, p, 1000, SEED).singular_fraction for m in ("aoa", "tof")]
    physical_ok = hybrid == 0.0 and single == [1.0, 1.0]
    ok = violations == 0 and worst <= 1e-9 and single_failures == 0 and physical_ok
    acceptance(3, ok, f"10^4 realizations: violations {violations}, max relative excess {worst:.2e}, "
                      f"N=1 draws with hybrid flagged singular {single_failures}; "
                      f"physical-gain N=1 singular fraction hybrid {hybrid:.0%}, AOA/TOF {single[0]:.0%}/{single[1]:.0%}")
    assert ok


def test_criterion_04_fim_oracle(acceptance):
    err_a, err_r = validation.check_fim_oracle(SEED, 1000)
    ok = err_a <= 1e-12 and err_r <= 1e-12
    acceptance(4, ok, f"1000 instances: AOA max rel err {err_a:.1e}, TOF {err_r:.1e} (tol 1e-12)")
    assert ok


def _crlb_mc(mode, n, lam, p, trials, seed):
    spec = DeploymentSpec.for_cluster(n, lam, exclusion_radius=1.0)
    return mc_expected_crlb(mode, spec, p, trials, seed).mean


def test_criterion_05_crlb_closed_form_and_scaling(acceptance):
    p = SystemParams.from_km2(lambda_t=50, m_t=4, m_r=10, beta=2.0, bandwidth_b=1e7)
    lam = p.lambda_b
    za, zr = zeta_a_sq(p), zeta_r_sq(p)
    ratios = {}
    for n in (8, 12, 16):
        mc = _crlb_mc("aoa", n, lam, p, 100_000, SEED + n)
        ratios[n] = mc / cf.crlb_aoa_closed(n, lam, 2.0, za)
    part_a = all(abs(r - 1) <= 0.20 for r in ratios.values())

    scaled = {}
    for mode, power in (("aoa", 1), ("tof", 2)):
        for n in (128, 256):
            scaled[mode, n] = _crlb_mc(mode, n, lam, p, 20_000, SEED + 7 * n + power) * math.log(n) ** power
    flat = {m: _rel(scaled[m, 256], scaled[m, 128]) for m in ("aoa", "tof")}
    part_b = all(v < 0.15 for v in flat.values())
    limit_ratio = scaled["tof", 256] / cf.crlb_tof_scaling_constant(lam, zr)
    part_c = abs(limit_ratio - 1) <= 0.30

    ok = part_a and part_b and part_c
    acceptance(5, ok, "MC/closed AOA " + ", ".join(f"N={n}: {r:.3f}" for n, r in ratios.items())
               + f" [{'ok' if part_a else 'over 20%'}]; flattening AOA {flat['aoa']:.3f} TOF {flat['tof']:.3f}"
               + f" [{'ok' if part_b else 'over 15%'}]; TOF ln^2 N limit ratio {limit_ratio:.3f}"
               + f" [{'ok' if part_c else 'outside 30%'}]")
    assert ok


def test_criterion_06_order_statistics(acceptance):
    lam = km2_to_m2(12.5)
    errs = {}
    for n in (1, 2, 3, 5):
        d = sample_nth_nearest(n, lam, 100_000, substream(SEED, 6, n))
        errs[n] = _rel(float(np.mean(d)), nth_nearest_mean_distance(n, lam))
    ok = all(e <= 0.01 for e in errs.values())
    acceptance(6, ok, "rel err " + ", ".join(f"n={n}: {e:.1e}" for n, e in errs.items()) + " (tol 1%)")
    assert ok


def test_criterion_07_laplace_transforms(acceptance):
    errs = validation.laplace_errors(SEED, 1_000_000)
    worst = max(errs.values())
    ok = worst <= 0.02
    acceptance(7, ok, f"z in {{0.1, 1, 10}}, 10^6 trials: max rel err {worst:.1e} (tol 2%)")
    assert ok


def test_criterion_08_rate(acceptance):
    d_values, m_values = (100, 125, 150), (2, 4, 8)
    errs = {}
    closed = {}
    for d in d_values:
        for m in m_values:
            p = SystemParams.from_km2(lambda_t=300, lambda_r=300, alpha=4, coop_radius_d=d).with_allocation(m)
            closed[d, m] = rate.closed_form_rate(p).rate_nats
            mc = rate.mc_rate(p, 100_000, SEED + d + m).mean
            errs[d, m] = _rel(mc, closed[d, m])
    part_a = max(errs.values()) <= 0.05
    part_b = all(closed[100, m] < closed[125, m] < closed[150, m] for m in m_values)

    grid = list(range(2, 17))
    argmax, unimodal = [], True
    for d in d_values:
        base = SystemParams.from_km2(lambda_t=300, lambda_r=300, alpha=4, coop_radius_d=d)
        curve = rate.rate_curve(base, grid)
        k = int(np.argmax(curve))
        unimodal &= all(a < b for a, b in zip(curve[:k], curve[1:k + 1]))
        unimodal &= all(a >= b for a, b in zip(curve[k:], curve[k + 1:]))
        argmax.append(grid[k])
    part_c = unimodal and argmax == sorted(argmax)
    ok = part_a and part_b and part_c
    acceptance(8, ok, f"max rel err closed vs MC {max(errs.values()):.4f} (tol 5%); increasing in D: {part_b}; "
                      f"unimodal: {unimodal}; argmax M_t by D: {argmax}")
    assert ok


def test_criterion_09_allocation_regimes(acceptance):
    def params(alpha):
        return SystemParams.from_km2(lambda_t=300, lambda_r=300, alpha=alpha, coop_radius_d=100,
                                     p_c=1.0, p_s=0.0)

    g_low = rate.allocation_regime(params(2.1)).curve
    g_high = rate.allocation_regime(params(8.0)).curve
    inc = all(a < b for a, b in zip(g_low, g_low[1:]))
    dec = all(a > b for a, b in zip(g_high, g_high[1:]))
    fractions = []
    for alpha in (3, 4, 6, 8):
        res = rate.rate_optimal_mt(params(alpha))
        fractions.append(res.m_t_star / max(res.m_t_grid))
    trend = all(a > b for a, b in zip(fractions, fractions[1:]))
    ok = inc and dec and trend
    acceptance(9, ok, f"G increasing at alpha=2.1: {inc}; decreasing at alpha=8: {dec}; "
                      f"optimal M_t fraction for alpha 3/4/6/8: " + "/".join(f"{f:.2f}" for f in fractions))
    assert ok


def test_criterion_10_special_functions(acceptance):
    errs = validation.special_function_errors(SEED, 100)
    quad = max(errs["beta_quadrature"], errs["gamma_quadrature"])
    ident = max(errs["beta_complement"], errs["gamma_complement"], errs["gamma_recurrence"])
    ok = quad <= 1e-8 and ident <= 1e-10
    acceptance(10, ok, f"vs quadrature {quad:.1e} (tol 1e-8); identities {ident:.1e} (tol 1e-10)")
    assert ok


def test_criterion_11_frontier(acceptance):
    p = SystemParams.from_km2(lambda_t=20, lambda_r=400, coop_radius_d=1000, bandwidth_b=1e6)
    m_grid = list(range(1, 13))
    pc_grid = list(np.linspace(0.0, 1.0, 10))
    equal, fronts = True, {}
    for mode in ("aoa", "tof", "hybrid"):
        full = bd.pareto_frontier(m_grid, pc_grid, p, mode)
        pruned = bd.pareto_frontier(m_grid, pc_grid, p, mode, prune=bd.PRUNE_PER_POWER)
        equal &= full.pairs() == pruned.pairs()
        fronts[mode] = full
    dominated = 0
    for mode in ("aoa", "tof"):
        for m in m_grid:
            for pc in pc_grid:
                pt = bd.evaluate_point(m, None, pc, p, mode)
                if fronts["hybrid"].best_crlb_at_rate(pt.rate) > pt.crlb * (1 + 1e-12):
                    dominated += 1
    ok = equal and dominated == 0
    acceptance(11, ok, f"pruned == exhaustive on 12x10 grid: {equal}; "
                       f"rate levels where hybrid is beaten: {dominated}")
    assert ok


SMALL_CONFIGS = {
    "gdop_vs_n": "options:\n  n_values: [4, 8]\n",
    "crlb_scaling": "options:\n  n_values: [8, 16]\n",
    "crlb_vs_density": "options:\n  m_t_values: [2, 4]\n",
    "rate_vs_mt": "params:\n  lambda_t: 300\n  lambda_r: 300\noptions:\n  d_values: [100]\n  m_t_values: [2, 4]\n",
    "alloc_vs_alpha": "params:\n  lambda_t: 300\n  lambda_r: 300\noptions:\n  d_values: [100]\n",
    "boundary": "params:\n  lambda_t: 20\n  lambda_r: 400\n  coop_radius_d: 1000\n"
                "options:\n  m_t_values: [1, 2, 3, 4]\n  p_c_values: [0, 0.5, 1]\n",
    "validate_formulas": "options:\n  dominance_realizations: 300\n  laplace_trials: 5000\n",
}


def test_criterion_12_determinism(tmp_path, acceptance):
    differing = []
    for name, body in SMALL_CONFIGS.items():
        cfg = parse_config(f"experiment: {name}\nseed: 77\ntrials: 2000\n" + body)
        a = run(cfg, str(tmp_path / name / "a"))
        b = run(cfg, str(tmp_path / name / "b"), threads=2)
        if a.status != 0 or a.files != b.files:
            differing.append(name)
    ok = not differing
    acceptance(12, ok, f"{len(SMALL_CONFIGS)} experiments rerun with same config+seed; "
                       f"differing checksums: {differing or 'none'}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
