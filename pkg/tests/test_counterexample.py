import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab import counterexample as cx
from holderlab.holder import PartialSumPath, holder_stat_exact

P = 3.0


@pytest.fixture(scope="module")
def params():
    return cx.make_tower_params(P)


@pytest.fixture(scope="module")
def mini():
    return cx.tower_from(P, [6], [4], validate=False)


def test_default_tower(params):
    assert params.b == (4, 22, 77)
    assert params.K == (4, 2**11, 2**38)
    assert all(v for v in params.certificates.values() if isinstance(v, bool))
    assert params.omitted_level_bound(2**22) < 1e-9


def test_invalid_tower_rejected():
    with pytest.raises(cx.InvalidTowerError):
        cx.tower_from(P, [6, 8], [4, 8])


def test_budget_error():
    with pytest.raises(cx.BudgetError):
        cx.make_tower_params(P, l_max=7)


@pytest.mark.parametrize("b", [3, 6, 10])
def test_odometer_tower_partition(b):
    bits, seen = [0] * b, set()
    for _ in range(2**b):
        seen.add(sum(v << k for k, v in enumerate(bits)))
        bits = cx.odometer_step(bits)
    assert seen == set(range(2**b))
    assert bits == [0] * b


def test_all_zero_state_gives_zero(params):
    st_ = cx.OdometerState(0, cx.state_bits(params))
    assert cx.eval_g(params, st_, 0).value == 0.0


def test_mini_tower_matches_definition(mini):
    N, K = 64, 4
    scale = 64 ** (1 / P) / K ** (0.5 + 1 / P)
    for m in range(N):
        j = N - m
        want = scale * (j if 1 <= j <= K else (2 * K - j if K < j < 2 * K else 0))
        assert cx.g_level_value(mini, 1, m) == pytest.approx(want, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**40), st.integers(0, 5000))
def test_g_matrix_agrees_with_eval_g(params, J, i):
    st_ = cx.OdometerState(J % 2 ** cx.state_bits(params), cx.state_bits(params))
    offs = cx.level_offsets(params, [st_])
    assert cx.g_matrix(params, offs, [i])[0, 0] == pytest.approx(cx.eval_g(params, st_, i).value, rel=1e-12)


def test_additivity(params):
    rng = np.random.default_rng(0)
    for st_ in cx.random_states(params, 20, rng):
        total = sum(cx.g_level_value(params, l, (st_.J + 7) % params.N[l - 1]) for l in (1, 2, 3))
        assert cx.eval_g(params, st_, 7).value == pytest.approx(total)


def test_nesting(params):
    rng = np.random.default_rng(1)
    for st_ in cx.random_states(params, 50, rng):
        for l in (2, 3):
            assert st_.position(params, l) % params.N[l - 2] == st_.position(params, l - 1)


def test_telescoping(params):
    rng = np.random.default_rng(2)
    x = cx.sample_increments(params, 0.0, 300, 50, rng)
    rng = np.random.default_rng(2)
    offs = cx.level_offsets(params, cx.random_states(params, 50, rng))
    g = cx.g_matrix(params, offs, [1, 301])
    assert np.abs(x.sum(axis=1) - (g[:, 0] - g[:, 1])).max() <= 1e-9


def test_mean_zero(params):
    x = cx.sample_increments(params, 1.0, 64, 10_000, np.random.default_rng(3))
    s = x.sum(axis=1)
    assert abs(s.mean()) <= 4 * s.std() / math.sqrt(s.size)


def test_event_indicator_matches_brute_force(mini):
    N = 64
    alpha = 0.5 - 1 / P
    states = [cx.OdometerState(J, cx.state_bits(mini)) for J in range(N)]
    offs = cx.level_offsets(mini, states)
    thresh = N ** (1 / P) / 2
    fast = cx._event_exact(mini, 1, offs, alpha, thresh)
    sparse = cx._event_sparse(mini, 1, offs, alpha, thresh)
    g = cx.g_matrix(mini, offs, np.arange(1, N + 1))
    brute = np.array([holder_stat_exact(PartialSumPath(np.concatenate(([0.0], row))), alpha).value
                      for row in g]) >= thresh
    assert np.array_equal(fast, brute)
    assert np.all(sparse <= brute)


def test_union_measure(mini):
    N, K = 64, 4
    vals = np.array([cx.g_level_value(mini, 1, m) for m in range(N)])
    alpha = 0.5 - 1 / P
    good = 0
    for k in range(N - K + 1):
        path = vals[(k + np.arange(1, N + 1)) % N]
        stat = holder_stat_exact(PartialSumPath(np.concatenate(([0.0], path))), alpha).value
        good += stat >= N ** (1 / P) * (1 - 1e-12)
    assert good / N == (N - K + 1) / N


def test_single_level_lp_norms(mini):
    c = 2 ** (1 / P)
    assert cx.exact_level_lp_norm(mini, 1, 1, P) == pytest.approx(c / 2.0, rel=1e-12)
    for n in (1, 2, 3):
        assert cx.exact_level_lp_norm(mini, 1, n, P) <= c * n / 2.0 * (1 + 1e-12)


def test_event_probability_level_one(params):
    est = cx.holder_event_probability(params, 1, 500, 0)
    assert est.method == "exact"
    assert est.probability >= 1 / 8


def test_lp_ratio_with_martingale_is_bounded(params):
    rs = cx.lp_ratio(params, P, 1.0, [2**6, 2**14, 2**22], 4000, 0)
    v = [r.estimate for r in rs]
    assert max(v) / min(v) <= 3


def test_lp_ratio_without_martingale_reports_norm(params):
    rs = cx.lp_ratio(params, P, 0.0, [2**6], 2000, 0)
    assert rs[0].coboundary_norm_ratio is not None
    assert rs[0].coboundary_norm_ratio ** P == pytest.approx(rs[0].estimate, rel=1e-9)
