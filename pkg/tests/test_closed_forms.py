import math

import pytest
from hypothesis import given, strategies as st

from isac_netsim import closed_forms as cf
from isac_netsim import oracles
from isac_netsim.params import km2_to_m2

LAM = km2_to_m2(12.5)


def test_gdop_closed_values():
    assert cf.gdop_aoa_closed(4) == pytest.approx(32 / 36)
    assert cf.gdop_aoa_oriented_closed(4) == pytest.approx(1 / 3)
    assert cf.gdop_tof_closed(4) == pytest.approx(1 / 6)
    assert cf.gdop_hybrid_closed(4) == pytest.approx(160 / (99 * 16 - 67))


@pytest.mark.parametrize("n", [2, 5, 16, 1000])
def test_orientation_gain_is_eight_thirds(n):
    assert cf.gdop_aoa_closed(n) / cf.gdop_aoa_oriented_closed(n) == pytest.approx(8 / 3)


@pytest.mark.parametrize("f", list(cf.GDOP_CLOSED.values()))
def test_gdop_undefined_below_two(f):
    assert f(1) == math.inf
    assert f(0) == math.inf


@pytest.mark.parametrize("n,p", [(1, 1), (10, 1), (37, 1.5), (200, 2), (5, 4)])
def test_harmonic_sum_matches_direct(n, p):
    assert cf.harmonic_sum(n, p) == pytest.approx(oracles.harmonic_direct(n, p), rel=1e-15)


def test_harmonic_values():
    assert cf.harmonic_sum(10, 1) == pytest.approx(7381 / 2520, rel=1e-15)
    assert cf.harmonic_sum(math.inf, 2) == pytest.approx(math.pi ** 2 / 6)
    assert cf.harmonic_sum(math.inf, 1) == math.inf


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_harmonic_asymptote_accuracy(p):
    n = 1000
    assert cf.harmonic_asymptote(n, p) == pytest.approx(cf.harmonic_sum(n, p), rel=1e-6)


def test_aoa_closed_frozen_values():
    # independent evaluation with direct harmonic sums
    assert cf.crlb_aoa_closed(2, 1.0) == pytest.approx(0.5733606121457688, rel=1e-13)
    assert cf.crlb_aoa_closed(10, LAM) == pytest.approx(70617364429459.9, rel=1e-12)


@given(st.integers(2, 300), st.floats(1e-6, 1e-3), st.floats(1e-3, 1e3))
def test_aoa_closed_scales_with_gain_and_density(n, lam, za):
    base = cf.crlb_aoa_closed(n, lam)
    assert cf.crlb_aoa_closed(n, lam, zeta_a_sq=za) == pytest.approx(base / za, rel=1e-12)
    assert cf.crlb_aoa_closed(n, 2 * lam) == pytest.approx(base / 8, rel=1e-12)


def test_aoa_general_beta_density_exponent():
    # density exponent is beta + 1
    for beta in (2.0, 3.0, 4.0):
        r = cf.crlb_aoa_closed(20, 2e-5, beta) / cf.crlb_aoa_closed(20, 1e-5, beta)
        assert r == pytest.approx(2.0 ** -(beta + 1), rel=1e-12)


@pytest.mark.parametrize("n", [10, 100, 2000])
def test_expected_distance_form_same_order(n):
    # the two forms differ only through the few nearest distances, which dominate both sums
    ratio = cf.crlb_aoa_expected_distance_form(n, LAM) / cf.crlb_aoa_closed(n, LAM)
    assert 0.6 < ratio < 1.0


def test_scaling_constants():
    assert cf.crlb_aoa_scaling_constant(1.0) == pytest.approx(320 / (3 * math.pi ** 5))
    assert cf.crlb_tof_scaling_constant(1.0) == pytest.approx(2 / math.pi ** 2)


def test_aoa_closed_approaches_scaling_law():
    n = 10 ** 6
    ratio = cf.crlb_aoa_closed(n, LAM) * math.log(n) / cf.crlb_aoa_scaling_constant(LAM)
    assert ratio == pytest.approx(1.0, abs=0.05)
    # convergence is monotone from below
    r3 = cf.crlb_aoa_closed(1000, LAM) * math.log(1000) / cf.crlb_aoa_scaling_constant(LAM)
    assert r3 < ratio < 1.0


def test_tof_closed_is_zero_aoa_hybrid():
    assert cf.crlb_tof_closed(50, LAM, 3.0) == cf.crlb_hybrid_closed(50, LAM, 0.0, 3.0)
    big_l = math.log(50) + 0.577 + 1 / 100
    assert cf.crlb_tof_closed(50, LAM, 3.0) == pytest.approx(2 / (3.0 * math.pi ** 2 * LAM ** 2 * big_l ** 2))


@pytest.mark.parametrize("n", [1000, 10 ** 4, 10 ** 6])
def test_hybrid_pre_limit_vs_asymptote_range_only(n):
    # with no bearing information the two differ by (ln N / L)^2, L = ln N + 0.577 + 1/(2N)
    a = cf.crlb_hybrid_closed(n, LAM, 0.0, 1e3)
    b = cf.crlb_hybrid_closed(n, LAM, 0.0, 1e3, asymptotic=True)
    big_l = math.log(n) + 0.577 + 0.5 / n
    assert a / b == pytest.approx((math.log(n) / big_l) ** 2, rel=1e-12)


def test_hybrid_asymptote_ratio_tends_to_one():
    ratios = [cf.crlb_hybrid_closed(n, LAM, 1.0, 1e3) / cf.crlb_hybrid_closed(n, LAM, 1.0, 1e3, asymptotic=True)
              for n in (10 ** 3, 10 ** 6, 10 ** 12)]
    assert ratios[0] < ratios[1] < ratios[2] < 1.0


@given(st.integers(2, 1000), st.floats(1e-6, 1.0), st.floats(-6, 6), st.floats(-6, 6))
def test_hybrid_below_single_type_forms(n, lam, log_za, log_zr):
    za, zr = 10.0 ** log_za, 10.0 ** log_zr
    h = cf.crlb_hybrid_closed(n, lam, za, zr)
    assert h <= cf.crlb_tof_closed(n, lam, zr) * (1 + 1e-12)
    assert h <= cf.crlb_aoa_closed(n, lam, 2.0, za) * (1 + 1e-12)


def _floor_ratio(n, lt, lr, d):
    x, y = lr * math.pi * d * d / n, lt * math.pi * d * d / n
    return (x / math.floor(x)) ** 3 * (y / math.floor(y)), (x / math.floor(x)) * (y / math.floor(y))


@pytest.mark.parametrize("n", [2, 5, 8, 13, 30])
def test_power_constrained_floor_vs_smooth(n):
    lt, lr, d = km2_to_m2(50), km2_to_m2(50), 500.0
    a_floor = cf.crlb_aoa_power_constrained(n, lt, lr, d, 1.0)
    a_smooth = cf.crlb_aoa_power_constrained(n, lt, lr, d, 1.0, floor=False)
    r_floor = cf.crlb_tof_power_constrained(n, lt, lr, d, 1.0)
    r_smooth = cf.crlb_tof_power_constrained(n, lt, lr, d, 1.0, floor=False)
    bound_a, bound_r = _floor_ratio(n, lt, lr, d)
    assert a_floor.value / a_smooth.value == pytest.approx(bound_a, rel=1e-9)
    assert r_floor.value / r_smooth.value == pytest.approx(bound_r, rel=1e-9)


def test_power_constrained_smooth_forms():
    n, lt, lr, d = 20, 3e-5, 7e-5, 2000.0
    a = cf.crlb_aoa_power_constrained(n, lt, lr, d, 2.0, floor=False).value
    assert a == pytest.approx(320 * n / (3 * 2.0 * lr ** 3 * lt * d ** 2 * math.pi ** 6 * math.log(n)))
    r = cf.crlb_tof_power_constrained(n, lt, lr, d, 2.0, floor=False).value
    assert r == pytest.approx(2 / (2.0 * lr * lt * math.pi ** 2 * math.log(n) ** 2))


def test_power_constrained_undefined_when_budget_too_small():
    res = cf.crlb_aoa_power_constrained(100, km2_to_m2(5), km2_to_m2(5), 100.0, 1.0)
    assert not res.defined and res.value == math.inf
    assert res.transmit_gain == 0.0


def test_scaling_law_report():
    n = [64, 128, 256]
    mc = [1.0 / math.log(k) for k in n]
    rep = cf.scaling_law_report(n, mc, mc, 1.0, 1)
    assert rep.converged
    assert rep.scaled_mc == pytest.approx([1.0] * 3)
    with pytest.raises(ValueError):
        cf.scaling_law_report([2, 3], [1.0], [1.0], 1.0, 1)
