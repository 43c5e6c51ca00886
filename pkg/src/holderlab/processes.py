"""Strictly stationary sequences with known dependence structure."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import signal

from .quantile import AbsGaussian, DecaySeq, Geometric, ParetoTail, QuantileFn, Table

BURN_IN_TOL = 1e-12


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class IidModel:
    dist: QuantileFn
    symmetric: bool = True
    name: str = "iid"

    def variance(self) -> float:
        m2 = self.dist.moment(2)
        if self.symmetric:
            return m2
        return m2 - self.dist.mean_abs() ** 2

    def autocov(self, k: int) -> float:
        return self.variance() if k == 0 else 0.0

    @property
    def alpha(self) -> DecaySeq:
        return Table((0.25, 0.0))

    @property
    def rho(self) -> DecaySeq:
        return Table((1.0, 0.0))

    def sample(self, rng: np.random.Generator, n: int, m: int) -> np.ndarray:
        if isinstance(self.dist, AbsGaussian):
            x = rng.standard_normal((m, n)) * self.dist.sigma
            return x if self.symmetric else np.abs(x)
        x = self.dist.sample_abs(rng, (m, n))
        if self.symmetric:
            x = x * rng.choice(np.array([-1.0, 1.0]), size=(m, n))
        return x


@dataclass(frozen=True)
class CausalLinear:
    """X_k = sum_j a_j eps_{k-j} with iid innovations.

    ``innovation`` is ``"gauss"`` (unit variance) or a tuple of equally likely
    values.
    """

    coeffs: tuple
    innovation: Any = "gauss"
    name: str = "causal-linear"
    declared_tau: DecaySeq | None = None
    declared_alpha: DecaySeq | None = None

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise ModelError("coefficients must be a non-empty 1-d sequence")
        object.__setattr__(self, "coeffs", tuple(a.tolist()))
        if self.innovation != "gauss":
            vals = tuple(float(v) for v in self.innovation)
            if len(vals) < 1:
                raise ModelError("finite innovation needs at least one value")
            object.__setattr__(self, "innovation", vals)

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.coeffs)

    @property
    def finite(self) -> bool:
        return self.innovation != "gauss"

    @property
    def innov_mean(self) -> float:
        return 0.0 if not self.finite else float(np.mean(self.innovation))

    @property
    def innov_var(self) -> float:
        return 1.0 if not self.finite else float(np.var(self.innovation))

    @property
    def horizon(self) -> int:
        """Smallest h with sum_{j>h} |a_j| < BURN_IN_TOL."""
        tail = np.cumsum(np.abs(self.a)[::-1])[::-1]  # tail[h] = sum_{j>=h}
        above = np.nonzero(tail >= BURN_IN_TOL)[0]
        h = 0 if above.size == 0 else int(above[-1])
        return h

    def autocov(self, k: int) -> float:
        a = self.a
        if k >= a.size:
            return 0.0
        return self.innov_var * float(np.dot(a[: a.size - k], a[k:]))

    def variance(self) -> float:
        return self.autocov(0)

    def sample(self, rng, n, m):
        h = self.a.size - 1
        if self.finite:
            vals = np.asarray(self.innovation)
            eps = vals[rng.integers(0, vals.size, size=(m, n + h))]
        else:
            eps = rng.standard_normal((m, n + h))
        x = signal.lfilter(self.a, [1.0], eps, axis=1)
        return x[:, h:]


@dataclass(frozen=True)
class GaussianAR1:
    phi: float = 0.5
    name: str = "ar1"

    def __post_init__(self):
        if not (-1.0 < self.phi < 1.0):
            raise ModelError("AR(1) needs |phi| < 1")

    def variance(self):
        return 1.0 / (1.0 - self.phi**2)

    def autocov(self, k):
        return self.phi ** abs(k) / (1.0 - self.phi**2)

    @property
    def rho(self) -> DecaySeq:
        # maximal correlation of a Gaussian pair equals |corr|
        return Geometric(1.0, abs(self.phi)) if self.phi != 0 else Table((1.0, 0.0))

    @property
    def marginal(self) -> QuantileFn:
        return AbsGaussian(math.sqrt(self.variance()))

    def sample(self, rng, n, m):
        eps = rng.standard_normal((m, n))
        eps[:, 0] *= math.sqrt(self.variance())
        x = signal.lfilter([1.0], [1.0, -self.phi], eps, axis=1)
        return x


@dataclass(frozen=True)
class CounterexampleModel:
    params: Any
    sigma_m: float = 1.0
    name: str = "counterexample"

    def autocov(self, k):
        raise ModelError("the counterexample has no closed-form covariance")

    def sample(self, rng, n, m):
        from .counterexample import sample_increments

        return sample_increments(self.params, self.sigma_m, n, m, rng)


ProcessModel = IidModel | CausalLinear | GaussianAR1 | CounterexampleModel


@dataclass
class Trajectory:
    values: np.ndarray
    model_id: str
    master_seed: int
    n: int = field(init=False)

    def __post_init__(self):
        self.n = int(len(self.values))


def sample_ensemble(model, n: int, m: int, seed) -> np.ndarray:
    """(m, n) array of independent stationary paths X_1..X_n."""
    if n < 1 or m < 1:
        raise ModelError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    return model.sample(rng, n, m)


def sample_path(model, n: int, seed) -> Trajectory:
    values = sample_ensemble(model, n, 1, seed)[0]
    return Trajectory(values=values, model_id=model.name, master_seed=seed)


def long_run_variance(model) -> float:
    """Var(X_0) + 2 sum_k Cov(X_0, X_k)."""
    if isinstance(model, IidModel):
        v = model.variance()
        if not math.isfinite(v):
            raise ModelError("infinite variance")
        return v
    if isinstance(model, GaussianAR1):
        return 1.0 / (1.0 - model.phi) ** 2
    if isinstance(model, CausalLinear):
        return model.innov_var * float(np.sum(model.a)) ** 2
    if isinstance(model, CounterexampleModel):
        # the coboundary part has bounded partial sums
        return model.sigma_m**2
    raise ModelError(f"no long-run variance for {type(model).__name__}")


def truncated_lrv(model, tol: float = 1e-12, max_lag: int = 10**6) -> float:
    """Covariance-series evaluation, used to cross-check the closed forms."""
    total = model.autocov(0)
    for k in range(1, max_lag):
        c = model.autocov(k)
        total += 2 * c
        if abs(c) < tol and k > 10:
            return total
    raise ModelError("covariance series did not converge")


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def bernoulli_shift(depth: int | None = None) -> CausalLinear:
    """X_k = sum_j 2^(-j-1) eps_{k-j}, eps fair on {-1/2, 1/2}: X_k ~ U[-1/2, 1/2]."""
    if depth is None:
        depth = 1
        while 2.0 ** (-depth) >= BURN_IN_TOL:  # tail sum_{j>=depth} 2^(-j-1) = 2^-depth
            depth += 1
    coeffs = tuple(2.0 ** (-j - 1) for j in range(depth))
    return CausalLinear(
        coeffs=coeffs,
        innovation=(-0.5, 0.5),
        name="bernoulli-shift",
        declared_tau=Geometric(1.0 / 3.0, 0.5),
        declared_alpha=Table((0.25,)),
    )


PRESETS = {
    "iid-gauss": "iid standard Gaussian",
    "iid-pareto:a": "iid symmetrized Pareto tail P(|X|>t)=min(1,t^-a), variance a/(a-2)",
    "bernoulli-shift": "causal linear X_k = sum 2^(-j-1) eps_(k-j), eps = +-1/2",
    "ar1:phi": "Gaussian AR(1) with unit innovation variance",
    "counterexample:p": "coboundary + Rademacher martingale on the dyadic odometer",
}


def make_preset(spec: str, sigma_m: float = 1.0):
    name, _, arg = spec.partition(":")
    try:
        if name == "iid-gauss" and not arg:
            return IidModel(AbsGaussian(1.0), name="iid-gauss")
        if name == "iid-pareto":
            return IidModel(ParetoTail(1.0, float(arg)), name=spec)
        if name == "bernoulli-shift" and not arg:
            return bernoulli_shift()
        if name == "ar1":
            return GaussianAR1(float(arg), name=spec)
        if name == "counterexample":
            from .counterexample import make_tower_params

            return CounterexampleModel(make_tower_params(float(arg) if arg else 3.0), sigma_m, name=spec)
    except ValueError as exc:
        raise ModelError(f"bad preset {spec!r}: {exc}") from exc
    raise ModelError(f"unknown preset {spec!r}")
