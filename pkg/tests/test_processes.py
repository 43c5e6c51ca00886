import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from holderlab.counterexample import make_tower_params
from holderlab.processes import (
    CausalLinear,
    CounterexampleModel,
    GaussianAR1,
    IidModel,
    ModelError,
    bernoulli_shift,
    long_run_variance,
    make_preset,
    sample_ensemble,
    sample_path,
    truncated_lrv,
)
from holderlab.quantile import AbsGaussian, ParetoTail


def test_same_seed_same_paths():
    m = make_preset("ar1:0.7")
    assert np.array_equal(sample_ensemble(m, 50, 4, 9), sample_ensemble(m, 50, 4, 9))
    assert not np.array_equal(sample_ensemble(m, 50, 4, 9), sample_ensemble(m, 50, 4, 10))


def test_trajectory_records_seed():
    tr = sample_path(make_preset("iid-gauss"), 17, 3)
    assert tr.n == 17 and tr.master_seed == 3 and tr.model_id == "iid-gauss"


def test_iid_pareto_law():
    x = sample_ensemble(IidModel(ParetoTail(1.0, 4.0)), 1, 20_000, 1)[:, 0]
    q = ParetoTail(1.0, 4.0)
    d = stats.kstest(np.abs(x), lambda t: 1.0 - np.array([q.tail(v) for v in np.atleast_1d(t)])).statistic
    assert d < 0.015
    assert abs(np.mean(np.sign(x))) < 0.03


@pytest.mark.parametrize("model", [
    GaussianAR1(0.5), bernoulli_shift(), IidModel(AbsGaussian(1.0)),
    CounterexampleModel(make_tower_params(3.0), 1.0),
], ids=["ar1", "bernoulli", "iid", "counterexample"])
def test_marginal_stationarity(model):
    x = sample_ensemble(model, 100, 10_000, 4)
    assert stats.ks_2samp(x[:, 0], x[:, 99]).statistic <= 0.03


def test_bernoulli_marginal_uniform():
    x = sample_ensemble(bernoulli_shift(), 3, 20_000, 2)[:, 2]
    assert stats.kstest(x, stats.uniform(-0.5, 1.0).cdf).statistic < 0.015


def test_ar1_partial_sum_variance():
    phi, n = 0.5, 64
    x = sample_ensemble(GaussianAR1(phi), n, 20_000, 5)
    s = x.sum(axis=1)
    exact = sum(phi ** abs(i - j) for i in range(n) for j in range(n)) / (1 - phi**2)
    se = exact * math.sqrt(2 / s.size)
    assert abs(s.var() - exact) < 4 * se


@pytest.mark.parametrize("model", [GaussianAR1(0.3), GaussianAR1(-0.6), bernoulli_shift(),
                                   CausalLinear((1.0, 0.5, -0.25))])
def test_long_run_variance_matches_series(model):
    assert long_run_variance(model) == pytest.approx(truncated_lrv(model), rel=1e-9)


def test_bernoulli_long_run_variance():
    # sum of coefficients is 1, innovation variance 1/4
    assert long_run_variance(bernoulli_shift()) == pytest.approx(0.25, rel=1e-10)


def test_counterexample_long_run_variance_is_martingale_part():
    assert long_run_variance(CounterexampleModel(make_tower_params(3.0), 2.0)) == 4.0


def test_infinite_variance_rejected():
    with pytest.raises(ModelError):
        long_run_variance(IidModel(ParetoTail(1.0, 2.0)))


@pytest.mark.parametrize("spec", ["nope", "ar1:1.5", "ar1:x", "iid-pareto:-1"])
def test_bad_presets(spec):
    with pytest.raises(ModelError):
        make_preset(spec)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.9, 0.9), st.integers(0, 2**31))
def test_ar1_scaling_equivariance(phi, seed):
    # a linear filter commutes with scaling the innovations
    base = CausalLinear((1.0, phi))
    scaled = CausalLinear((2.0, 2 * phi))
    a = sample_ensemble(base, 20, 3, seed)
    b = sample_ensemble(scaled, 20, 3, seed)
    assert np.allclose(b, 2 * a)
