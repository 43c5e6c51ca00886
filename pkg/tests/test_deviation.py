import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab.deviation import (
    FukNagaevInput,
    ShaoInput,
    default_K_grid,
    empirical_tail,
    fuk_nagaev_bound,
    rho_sum,
    s_N_squared,
    s_N_squared_tau_bound,
    shao_bound,
    shao_threshold_A,
)
from holderlab.dependence import marginal_law
from holderlab.processes import GaussianAR1, bernoulli_shift
from holderlab.quantile import AbsGaussian, BoundedConst, Empirical, Geometric, ParetoTail


@pytest.fixture(scope="module")
def bern():
    m = bernoulli_shift()
    G = marginal_law(m)
    return m, Empirical(tuple(G.atoms - G.mean()))


def test_s_N_ar1():
    assert s_N_squared(GaussianAR1(0.5), 2) == pytest.approx(4.0)


@pytest.mark.parametrize("N", [4, 32, 256])
def test_s_N_below_tau_bound(bern, N):
    m, Q = bern
    assert s_N_squared(m, N) <= s_N_squared_tau_bound(N, Q, m.declared_tau)


def test_fuk_nagaev_decreasing_in_lambda(bern):
    m, Q = bern
    s2 = s_N_squared(m, 512)
    vals = [fuk_nagaev_bound(FukNagaevInput(lam, 512, 8.0, Q, m.declared_tau, s2))
            for lam in np.geomspace(0.5, 50, 10)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_fuk_nagaev_validates():
    with pytest.raises(ValueError):
        FukNagaevInput(-1.0, 10, 2.0, BoundedConst(1.0), Geometric(), 1.0)


def test_threshold_examples():
    assert shao_threshold_A(1e-9, 10, BoundedConst(2.0)) == pytest.approx(2.0)
    # 2N * 1.5 / A^2 = x for the Pareto(1, 3) tail
    assert shao_threshold_A(0.3, 10, ParetoTail(1.0, 3.0)) == pytest.approx(math.sqrt(3 * 10 / 0.3), rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 50.0), st.floats(1.01, 4.0), st.integers(4, 512))
def test_shao_bound_monotone_in_x(x, factor, N):
    ar = GaussianAR1(0.5)
    a = shao_bound(ShaoInput(x, N, 4.0, 1.0, ar.rho, ar.marginal))
    b = shao_bound(ShaoInput(x * factor, N, 4.0, 1.0, ar.rho, ar.marginal))
    assert b <= a * (1 + 1e-9)


def test_shao_bound_vanishes_at_infinity():
    ar = GaussianAR1(0.5)
    assert shao_bound(ShaoInput(1e4, 64, 4.0, 1.0, ar.rho, ar.marginal)) < 1e-6


def test_shao_bound_increasing_in_K():
    ar = GaussianAR1(0.5)
    vals = [shao_bound(ShaoInput(40.0, 64, 4.0, K, ar.rho, ar.marginal)) for K in (0.1, 1.0, 10.0)]
    assert vals[0] <= vals[1] <= vals[2]


def test_rho_sum_finite_and_series():
    r = Geometric(1.0, 0.5)
    assert rho_sum(r, 8) == pytest.approx(0.5 + 0.25 + 0.5**4 + 0.5**8)
    assert rho_sum(r, 8, infinite=True) > rho_sum(r, 8)


def test_k_grid_spacing():
    g = default_K_grid(1e-3, 1e3, 8)
    assert g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e3)
    assert np.allclose(np.diff(np.log10(g)), 1 / 8)


def test_empirical_tail_counts():
    m = np.array([[0.0, 1.0, 3.0], [0.0, 0.5, 0.5]])
    p, se = empirical_tail(m, 3, 1.0)
    assert p == 0.5 and se == pytest.approx(0.5 / math.sqrt(2))
