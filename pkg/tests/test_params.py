import math

import numpy as np
import pytest

from isac_netsim.params import (
    Fim2,
    McEstimate,
    NetworkRealization,
    SystemParams,
    km2_to_m2,
    m2_to_km2,
    trace_inverse,
    validate,
    zeta_a_sq,
    zeta_a_tilde_sq,
    zeta_r_sq,
    zeta_r_tilde_sq,
)


def test_unit_conversion_roundtrip():
    assert km2_to_m2(50.0) == pytest.approx(5e-5)
    assert m2_to_km2(km2_to_m2(12.5)) == pytest.approx(12.5)


def test_lambda_b_defaults_to_budget_split():
    p = SystemParams.from_km2(lambda_t=50, m_t=4)
    assert m2_to_km2(p.lambda_b) == pytest.approx(12.5)


def test_baseline_is_valid():
    assert validate(SystemParams.from_km2(m_t=4, lambda_t=50, lambda_b=12.5)) == []
    assert validate(SystemParams()) == []


def test_power_split_violation():
    p = SystemParams(p_c=0.6, p_s=0.5)
    assert "p_c + p_s > 1" in validate(p)


def test_strict_mode_requires_full_power():
    assert any("strict" in v for v in validate(SystemParams(p_c=0.3, p_s=0.3)))
    assert validate(SystemParams(p_c=0.3, p_s=0.3, power_mode="sweep")) == []


def test_alpha_below_two():
    assert "alpha < 2" in validate(SystemParams(alpha=1.5))


def test_antenna_budget_violations():
    p = SystemParams.from_km2(lambda_t=50, lambda_r=50, m_t=4, lambda_b=20, m_r=10)
    problems = validate(p)
    assert "lambda_b * m_t > lambda_t" in problems
    assert "lambda_b * m_r > lambda_r" in problems


def test_validate_never_raises_on_garbage():
    p = SystemParams(lambda_t=float("nan"), m_r=2.5, beta=1.0, power_mode="bogus")
    problems = validate(p)
    assert "lambda_t is NaN" in problems
    assert "m_r is not an integer" in problems
    assert "beta < 2" in problems
    assert any("power_mode" in v for v in problems)


def test_with_allocation_spends_receive_budget():
    p = SystemParams.from_km2(lambda_t=20, lambda_r=400).with_allocation(5)
    assert m2_to_km2(p.lambda_b) == pytest.approx(4.0)
    assert p.m_r == 100


def test_replace_rederives_lambda_b():
    p = SystemParams.from_km2(lambda_t=50, m_t=4).replace(m_t=5)
    assert m2_to_km2(p.lambda_b) == pytest.approx(10.0)


def test_zeta_formulas():
    p = SystemParams(m_r=10, g_t=2.0, rcs_sigma=3.0, p_s=0.5, gamma_0=4.0, noise_sigma_s2=1e-10,
                     bandwidth_b=1e7)
    assert zeta_a_sq(p) == pytest.approx(math.pi ** 2 / 6 * 10 * 99 * 2 * 3 * 0.5 * 4 / 1e-10)
    c = p.speed_of_light_c
    assert zeta_r_sq(p) == pytest.approx(8 * math.pi ** 2 * 0.5 * 2 * 10 * 1e14 * 12 / (3 * c * c * 1e-10))
    # the array-free gains drop M_r(M_r^2-1) G_t and M_r G_t / 3
    assert zeta_a_sq(p) / zeta_a_tilde_sq(p) == pytest.approx(10 * 99 * 2)
    assert zeta_r_sq(p) / zeta_r_tilde_sq(p) == pytest.approx(10 * 2 / 3)


def test_single_receive_antenna_has_no_aoa_gain():
    assert zeta_a_sq(SystemParams(m_r=1)) == 0.0


def test_realization_rejects_bad_input():
    with pytest.raises(ValueError):
        NetworkRealization.from_lists([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        NetworkRealization.from_lists([1.0], [0.0, 1.0])


def test_realization_is_read_only():
    r = NetworkRealization.from_lists([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        r.distances[0] = 3.0


def test_fim2_algebra():
    f = Fim2(2.0, 0.5, 1.0)
    assert f.trace == 3.0
    assert f.det == pytest.approx(1.75)
    assert trace_inverse(f) == pytest.approx(np.trace(np.linalg.inv(f.as_array())))
    assert (f + f).f12 == 1.0
    assert f.scaled(3).f22 == 3.0
    assert f.is_psd()


def test_singular_fim_gives_inf():
    assert trace_inverse(Fim2(1.0, 1.0, 1.0)) == math.inf
    assert trace_inverse(Fim2(0.0, 0.0, 0.0)) == math.inf
    assert trace_inverse(Fim2(1.0, 0.0, 1e-13)) == math.inf


def test_mc_estimate_properties():
    e = McEstimate(2.0, 0.1, 100, 7, singular=5)
    assert e.singular_fraction == 0.05
    assert e.defined
    assert e.rel_error == pytest.approx(0.05)
    assert not McEstimate(math.nan, math.nan, 10, 0, singular=10).defined
