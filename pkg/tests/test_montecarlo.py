import numpy as np
import pytest

from isac_netsim.montecarlo import THREADS_ENV, chunk_sizes, default_threads, mc_mean, reduce_values, substream


def _normal(rng, size):
    return rng.normal(1.0, 2.0, size)


def test_chunk_sizes():
    assert chunk_sizes(25, 10) == [10, 10, 5]
    assert chunk_sizes(20, 10) == [10, 10]
    assert sum(chunk_sizes(123_457)) == 123_457


def test_substreams_are_independent_and_reproducible():
    a = substream(5, 0, 1).random(4)
    assert np.array_equal(a, substream(5, 0, 1).random(4))
    assert not np.array_equal(a, substream(5, 0, 2).random(4))
    assert not np.array_equal(a, substream(6, 0, 1).random(4))


def test_mean_is_bitwise_independent_of_threads():
    one = mc_mean(_normal, 35_000, 11, chunk=4000, threads=1)
    many = mc_mean(_normal, 35_000, 11, chunk=4000, threads=4)
    assert one == many


def test_threads_env_fallback(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3
    monkeypatch.setenv(THREADS_ENV, "junk")
    assert default_threads() == 1


def test_standard_error_matches_normal_theory():
    est = mc_mean(_normal, 200_000, 3)
    assert est.mean == pytest.approx(1.0, abs=5 * est.std_error)
    assert est.std_error == pytest.approx(2.0 / np.sqrt(200_000), rel=0.02)


def test_non_finite_values_are_counted_as_singular():
    est = reduce_values([np.array([1.0, np.inf, 3.0]), np.array([np.nan, 5.0])], 5, 0)
    assert est.singular == 2
    assert est.mean == pytest.approx(3.0)


def test_all_singular():
    est = reduce_values([np.array([np.inf, np.inf])], 2, 0)
    assert not est.defined


def test_zero_trials_rejected():
    with pytest.raises(ValueError):
        mc_mean(_normal, 0, 0)
