import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from holderlab.quantile import (
    INF,
    AbsGaussian,
    BoundedConst,
    DomainError,
    Empirical,
    Geometric,
    IntegrabilityError,
    ParetoTail,
    Power,
    Table,
    Zero,
    alpha_profile,
    condition_functional_alpha,
    condition_functional_tau,
    condition_report,
    decay_inverse,
    integrated_quantile,
    integrated_quantile_inverse,
    level_crossing,
    quantile_eval,
    raw_functional_quadrature,
    tau_profile,
    weak_lp_tail_functional,
)

unit = st.floats(1e-9, 1.0, allow_nan=False)


def test_pareto_quantile_closed_form():
    assert quantile_eval(ParetoTail(1.0, 2.0), 0.25) == pytest.approx(2.0)


def test_empirical_quantile_median():
    assert quantile_eval(Empirical((1.0, 2.0, 3.0, 4.0)), 0.5) == 2.0


def test_bounded_and_out_of_range():
    Q = BoundedConst(2.0)
    assert Q.eval(0.3) == 2.0
    with pytest.raises(DomainError):
        Q.eval(0.0)
    with pytest.raises(DomainError):
        Q.eval(1.5)


def test_gaussian_quantile_deep_tail_is_finite():
    Q = AbsGaussian(1.0)
    assert math.isfinite(Q.eval(1e-250))
    assert Q.eval(1e-20) == pytest.approx(stats.norm.isf(5e-21))


def test_heavy_pareto_not_integrable():
    with pytest.raises(IntegrabilityError):
        integrated_quantile(ParetoTail(1.0, 1.0), 0.5)


def test_integrated_gaussian_matches_quadrature():
    from scipy import integrate

    Q = AbsGaussian(1.7)
    val, _ = integrate.quad(Q.eval, 0.0, 0.3, epsabs=1e-13)
    assert Q.integrated(0.3) == pytest.approx(val, rel=1e-8)
    assert Q.mean_abs() == pytest.approx(1.7 * math.sqrt(2 / math.pi))


@given(st.floats(0.2, 5.0), st.floats(1.2, 8.0), unit, unit)
def test_H_monotone_and_concave(scale, index, a, b):
    Q = ParetoTail(scale, index)
    lo, hi = sorted((a, b))
    assert Q.integrated(lo) <= Q.integrated(hi) + 1e-15
    mid = 0.5 * (lo + hi)
    assert Q.integrated(mid) >= 0.5 * (Q.integrated(lo) + Q.integrated(hi)) - 1e-12


@given(st.floats(0.2, 5.0), st.floats(1.2, 8.0), st.floats(0.01, 0.99))
def test_inverse_of_H(scale, index, frac):
    Q = ParetoTail(scale, index)
    y = frac * Q.mean_abs()
    x = integrated_quantile_inverse(Q, y)
    assert Q.integrated(x) == pytest.approx(y, rel=1e-9, abs=1e-12)


def test_empirical_matches_sample_law():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(4000)
    Q = Empirical(tuple(x))
    u = rng.random(4000)
    draws = Q.eval_array(1.0 - u)
    assert stats.ks_2samp(draws, np.abs(x)).statistic < 0.05


@pytest.mark.parametrize(
    "seq, u, expected",
    [
        (Power(1.0, 2.0), 0.1, 4),
        (Geometric(1.0, 0.5), 1 / 8, 3),
        (Table((0.5, 0.2, 0.1)), 0.2, 1),
        (Table((0.5, 0.2, 0.1)), 0.05, INF),
        (Zero(), 0.0, 0),
    ],
)
def test_decay_inverse_examples(seq, u, expected):
    assert decay_inverse(seq, u) == expected


seqs = st.one_of(
    st.builds(Power, st.floats(0.1, 2.0), st.floats(0.3, 6.0)),
    st.builds(Geometric, st.floats(0.1, 2.0), st.floats(0.05, 0.95)),
)


@given(seqs, st.floats(1e-8, 1.0), st.integers(0, 10_000))
def test_decay_inverse_galois(seq, u, k):
    # inverse(u) <= k  <=>  seq(k) <= u
    assert (decay_inverse(seq, u) <= k) == (seq.value(k) <= u)


def test_negative_level_rejected():
    with pytest.raises(DomainError):
        decay_inverse(Power(), -1.0)


def test_fast_path_matches_oracle_bounded_geometric():
    Q, seq = BoundedConst(2.0), Geometric(2.0, 0.5)
    fast = condition_functional_tau(3.0, Q, seq, 10.0)
    oracle = raw_functional_quadrature(3.0, Q, tau_profile(Q, seq), 10.0)
    assert fast == pytest.approx(oracle, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(1.5, 6.0), st.floats(0.5, 8.0), st.floats(2.1, 5.0),
       st.floats(0.5, 200.0))
def test_alpha_functional_matches_oracle(scale, index, theta, p, t):
    Q, seq = ParetoTail(scale, index), Power(1.0, theta)
    fast = condition_functional_alpha(p, Q, seq, t)
    oracle = raw_functional_quadrature(p, Q, alpha_profile(Q, seq), t)
    assert fast == pytest.approx(oracle, rel=1e-6, abs=1e-300)


def test_level_crossing_of_decreasing_profile():
    assert level_crossing(lambda u: 1.0 / u, 4.0) == pytest.approx(0.25, rel=1e-12)
    assert level_crossing(lambda u: 1.0 / u, 0.5) == 1.0


@pytest.mark.parametrize("t", [1.0, 4.0, 16.0, 64.0])
def test_weak_lp_closed_form(t):
    assert weak_lp_tail_functional(2.5, ParetoTail(1.0, 3.0), t) == pytest.approx(1.5 * t**-0.5, rel=1e-8)
    assert weak_lp_tail_functional(3.0, ParetoTail(1.0, 3.0), t) == pytest.approx(1.5, rel=1e-8)


def test_iid_alpha_condition_reduces_to_weak_lp():
    # alpha(0) = 1/4 and alpha(k) = 0 afterwards: u* solves Q(u) = t, so
    # the functional is t^(p-1) H(P(|f| > t))
    Q = ParetoTail(1.0, 3.0)
    iid = Table((0.25, 0.0))
    for t in (2.0, 5.0, 30.0):
        a = condition_functional_alpha(2.5, Q, iid, t)
        assert a == pytest.approx(weak_lp_tail_functional(2.5, Q, t), rel=1e-9)


def test_report_trend_hints():
    Q = ParetoTail(1.0, 4.0)
    rep = condition_report("alpha", 3.0, Q, Power(1.0, 6.4), [10, 100, 1000, 10000])
    assert rep.values[-1] > rep.values[0]
    rep = condition_report("iid", 3.0, ParetoTail(1.0, 3.0), None, [1, 4, 16])
    assert rep.verdict_hint == "flat"


def test_p_must_exceed_two():
    with pytest.raises(DomainError):
        condition_functional_alpha(2.0, BoundedConst(1.0), Power(), 1.0)
