import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab.processes import IidModel, sample_ensemble
from holderlab.quantile import AbsGaussian
from holderlab.tightness import dyadic_levels_for, level_maxima, tightness_from_maxima, tightness_sum

GAUSS = IidModel(AbsGaussian(1.0))


@pytest.fixture(scope="module")
def maxima():
    x = sample_ensemble(GAUSS, 2048, 4000, 0)
    return level_maxima(x, 11)


def test_levels():
    assert dyadic_levels_for(4096, 0.5) == 11
    assert dyadic_levels_for(4096, 0.05) == 7
    assert dyadic_levels_for(10, 0.1) == 0


def test_empty_window_flagged():
    est = tightness_sum(GAUSS, 16, 0.1, 1.0, 3.0, 10, 0)
    assert est.empty and est.value == 0.0


def test_level_maxima_match_direct():
    x = sample_ensemble(GAUSS, 8, 3, 1)
    m = level_maxima(x, 3)
    s = np.abs(np.cumsum(x, axis=1))
    assert np.allclose(m[:, 2], s.max(axis=1))
    assert np.allclose(m[:, 0], s[:, :2].max(axis=1))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 4.0), st.floats(1.01, 3.0))
def test_monotone_in_eps(maxima, eps, factor):
    a = tightness_from_maxima(maxima[:, :10], 4096, 0.5, eps, 3.0).value
    b = tightness_from_maxima(maxima[:, :10], 4096, 0.5, eps * factor, 3.0).value
    assert b <= a


@pytest.mark.parametrize("eps", [0.25, 0.5, 1.0])
def test_delta_ordering_is_strict_where_nonzero(maxima, eps):
    small = tightness_from_maxima(maxima[:, :7], 4096, 0.05, eps, 3.0)
    large = tightness_from_maxima(maxima[:, :11], 4096, 0.5, eps, 3.0)
    assert 0 < small.value < large.value


def test_eps_doubling_decreases_strictly():
    vals = [tightness_sum(GAUSS, 4096, 0.5, e, 3.0, 4000, 0).value for e in (0.25, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_csv_rows_cover_levels(maxima):
    est = tightness_from_maxima(maxima[:, :5], 1000, 0.04, 1.0, 3.0)
    rows = list(est.csv_rows())
    assert [r["k"] for r in rows] == [1, 2, 3, 4, 5]
    assert est.value == pytest.approx(1000 * sum(r["contribution"] for r in rows))
