import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from holderlab.holder import (
    EXACT_MAX_N,
    PartialSumPath,
    SizeError,
    dyadic_constant,
    holder_stat_dyadic,
    holder_stat_exact,
    holder_stat_fast,
    polygonal_eval,
    sample_bm_reference,
    scaled_holder_modulus,
    scaled_statistic_ensemble,
)

increments = arrays(np.float64, st.integers(2, 200), elements=st.floats(-10, 10))
alphas = st.sampled_from([1 / 6, 1 / 4, 1 / 3, 0.45])


def brute(s, alpha):
    n = len(s)
    return max(abs(s[j] - s[i]) / (j - i) ** alpha for i in range(n) for j in range(i + 1, n))


def test_small_example():
    S = PartialSumPath(np.array([0.0, 1.0, 0.0, 2.0]))
    st_ = holder_stat_exact(S, 0.5)
    assert st_.value == pytest.approx(2.0 / 1.0)
    S = PartialSumPath(np.array([0.0, 1.0, -1.0, 2.0]))
    st_ = holder_stat_exact(S, 0.5)
    assert st_.value == pytest.approx(3.0) and st_.argmax == (2, 3)


def test_polygonal_interpolates():
    S = PartialSumPath.from_increments([1.0, 3.0])
    assert polygonal_eval(S, 0.25) == pytest.approx(0.5)
    assert polygonal_eval(S, 0.75) == pytest.approx(2.5)
    assert polygonal_eval(S, 1.0) == 4.0
    with pytest.raises(ValueError):
        polygonal_eval(S, 1.5)


@given(increments, alphas)
def test_exact_matches_brute_force(x, alpha):
    S = PartialSumPath.from_increments(x)
    assert holder_stat_exact(S, alpha).value == pytest.approx(brute(S.sums[1:], alpha), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(increments, alphas)
def test_fast_matches_exact(x, alpha):
    S = PartialSumPath.from_increments(x)
    fast = holder_stat_fast(S.sums[1:][None, :], alpha)[0]
    assert fast == pytest.approx(holder_stat_exact(S, alpha).value, rel=1e-12)


@given(increments, alphas)
def test_dyadic_bracket(x, alpha):
    S = PartialSumPath.from_increments(x)
    d, e = holder_stat_dyadic(S, alpha).value, holder_stat_exact(S, alpha).value
    assert d <= e * (1 + 1e-12)
    assert e <= 2**alpha * d * (1 + 1e-12) + 1e-300
    assert 2**alpha < dyadic_constant(alpha)


@given(increments, alphas, st.floats(0.01, 100.0))
def test_statistic_scales_linearly(x, alpha, c):
    a = holder_stat_exact(PartialSumPath.from_increments(x), alpha).value
    b = holder_stat_exact(PartialSumPath.from_increments(c * np.asarray(x)), alpha).value
    assert b == pytest.approx(c * a, rel=1e-9, abs=1e-300)


def test_constant_drift_has_known_statistic():
    # S_i = i: the ratio d / d^alpha peaks at the longest span
    n, alpha = 100, 0.25
    S = PartialSumPath.from_increments(np.ones(n))
    assert holder_stat_exact(S, alpha).value == pytest.approx((n - 1) ** (1 - alpha))


def test_modulus_window():
    S = PartialSumPath.from_increments(np.ones(10))
    val, empty = scaled_holder_modulus(S, 0.25, 0.35)
    assert not empty
    assert val == pytest.approx(10 ** (0.25 - 0.5) * 3 ** 0.75)
    assert scaled_holder_modulus(S, 0.25, 0.1) == (0.0, True)


def test_size_limit():
    with pytest.raises(SizeError):
        holder_stat_exact(PartialSumPath(np.zeros(EXACT_MAX_N + 2)), 0.25)


def test_rejects_bad_alpha():
    with pytest.raises(ValueError):
        holder_stat_exact(PartialSumPath.from_increments([1.0, 2.0]), 1.0)


def test_reference_is_scale_free():
    # Gaussian walk with unit increments scaled by n^(alpha - 1/2)
    ref = sample_bm_reference(512, 1 / 6, 0, paths=200)
    rng = np.random.default_rng(0)
    x = rng.standard_normal((200, 512)) / math.sqrt(512) * math.sqrt(512)
    assert np.allclose(ref, scaled_statistic_ensemble(x, 1 / 6))


def test_reference_stabilizes_in_n():
    from scipy import stats

    a = sample_bm_reference(256, 1 / 4, 1, paths=1000)
    b = sample_bm_reference(2048, 1 / 4, 2, paths=1000)
    assert stats.ks_2samp(a, b).statistic < 0.1
