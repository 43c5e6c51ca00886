"""Quantile functions, decay sequences and the integral condition functionals.

A :class:`QuantileFn` is ``u -> Q(u) = inf{t : P(|X| > t) <= u}`` on (0, 1].
Its running integral ``H(x) = int_0^x Q`` and the generalized inverse ``G`` of
``H`` drive both the mixing conditions and the Fuk-Nagaev bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special, stats

QUAD_EPSABS = 1e-9
QUAD_EPSREL = 1e-6
INF = math.inf


class DomainError(ValueError):
    pass


class IntegrabilityError(ValueError):
    pass


def _check_u(u: float) -> None:
    if not (0.0 < u <= 1.0):
        raise DomainError(f"u must lie in (0, 1], got {u!r}")


# ---------------------------------------------------------------------------
# quantile functions
# ---------------------------------------------------------------------------


class QuantileFn:
    """Base class; subclasses provide closed forms where they exist."""

    def eval(self, u: float) -> float:
        raise NotImplementedError

    def tail(self, t: float) -> float:
        """P(|X| > t)."""
        raise NotImplementedError

    def tail_ge(self, t: float) -> float:
        """P(|X| >= t)."""
        return self.tail(t)

    def integrated(self, x: float) -> float:
        raise NotImplementedError

    def mean_abs(self) -> float:
        return self.integrated(1.0)

    def moment(self, q: float) -> float:
        """E|X|^q."""
        val, _ = integrate.quad(lambda u: self.eval(u) ** q, 0.0, 1.0, limit=200)
        return val

    def trunc_mean_ge(self, a: float) -> float:
        """E[|X| 1{|X| >= a}]."""
        if a <= 0:
            return self.mean_abs()
        return self.integrated(self.tail_ge(a))

    def trunc_moment_le(self, q: float, a: float) -> float:
        """E[|X|^q 1{|X| <= a}]."""
        lo = self.tail(a)
        if lo >= 1.0:
            return 0.0
        val, _ = integrate.quad(lambda u: self.eval(u) ** q, lo, 1.0, limit=200)
        return val

    def sample_abs(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.eval_array(1.0 - rng.random(size))

    def eval_array(self, u: np.ndarray) -> np.ndarray:
        return np.vectorize(self.eval, otypes=[float])(u)


@dataclass(frozen=True)
class ParetoTail(QuantileFn):
    """P(|X| > t) = min(1, (scale/t)^index)."""

    scale: float = 1.0
    index: float = 2.0

    def __post_init__(self):
        if self.scale <= 0 or self.index <= 0:
            raise ValueError("ParetoTail needs scale > 0 and index > 0")

    def eval(self, u):
        _check_u(u)
        return self.scale * u ** (-1.0 / self.index)

    def eval_array(self, u):
        return self.scale * np.asarray(u, dtype=float) ** (-1.0 / self.index)

    def tail(self, t):
        if t < self.scale:
            return 1.0
        return (self.scale / t) ** self.index

    def _require_integrable(self):
        if self.index <= 1:
            raise IntegrabilityError(f"Pareto index {self.index} <= 1 is not integrable")

    def integrated(self, x):
        if not (0.0 <= x <= 1.0):
            raise DomainError(f"x must lie in [0, 1], got {x!r}")
        self._require_integrable()
        a = self.index
        return self.scale * a / (a - 1.0) * x ** ((a - 1.0) / a)

    def moment(self, q):
        if q >= self.index:
            return INF
        return self.scale**q * self.index / (self.index - q)

    def trunc_mean_ge(self, a):
        self._require_integrable()
        if a <= self.scale:
            return self.mean_abs()
        k = self.index
        return self.scale**k * k / (k - 1.0) * a ** (1.0 - k)

    def trunc_moment_le(self, q, a):
        if a <= self.scale:
            return 0.0
        k, c = self.index, self.scale
        # int_c^a t^q d(-(c/t)^k) = k c^k int_c^a t^(q-k-1) dt
        if math.isclose(q, k):
            return k * c**k * math.log(a / c)
        return k * c**k * (a ** (q - k) - c ** (q - k)) / (q - k)


@dataclass(frozen=True)
class BoundedConst(QuantileFn):
    """|X| = c almost surely."""

    c: float = 1.0

    def eval(self, u):
        _check_u(u)
        return float(self.c)

    def eval_array(self, u):
        return np.full(np.shape(u), float(self.c))

    def tail(self, t):
        return 1.0 if t < self.c else 0.0

    def tail_ge(self, t):
        return 1.0 if t <= self.c else 0.0

    def integrated(self, x):
        if not (0.0 <= x <= 1.0):
            raise DomainError(f"x must lie in [0, 1], got {x!r}")
        return self.c * x

    def moment(self, q):
        return float(self.c) ** q

    def trunc_moment_le(self, q, a):
        return float(self.c) ** q if self.c <= a else 0.0


@dataclass(frozen=True)
class AbsGaussian(QuantileFn):
    """|X| for X ~ N(0, sigma^2)."""

    sigma: float = 1.0

    def eval(self, u):
        _check_u(u)
        return -self.sigma * float(special.ndtri(u / 2.0)) if u < 1 else 0.0

    def eval_array(self, u):
        return self.sigma * stats.norm.isf(np.asarray(u, dtype=float) / 2.0)

    def tail(self, t):
        if t <= 0:
            return 1.0
        return float(2.0 * stats.norm.sf(t / self.sigma))

    def integrated(self, x):
        if not (0.0 <= x <= 1.0):
            raise DomainError(f"x must lie in [0, 1], got {x!r}")
        if x == 0.0:
            return 0.0
        # int_0^x Q = E[|X| 1{|X| > Q(x)}] = 2 sigma phi(Q(x)/sigma)
        z = stats.norm.isf(x / 2.0)
        return float(2.0 * self.sigma * stats.norm.pdf(z))

    def moment(self, q):
        return float(self.sigma**q * 2 ** (q / 2) * special.gamma((q + 1) / 2) / math.sqrt(math.pi))

    def trunc_moment_le(self, q, a):
        if a <= 0:
            return 0.0
        # lower incomplete gamma in a^2 / (2 sigma^2)
        return self.moment(q) * float(special.gammainc((q + 1) / 2, a * a / (2.0 * self.sigma**2)))


@dataclass(frozen=True)
class Empirical(QuantileFn):
    """Quantile function of |X| for the uniform law on a finite sample."""

    values: tuple = field(default=())

    def __post_init__(self):
        arr = np.sort(np.abs(np.asarray(self.values, dtype=float)))
        if arr.size == 0:
            raise ValueError("Empirical needs at least one value")
        object.__setattr__(self, "values", tuple(arr.tolist()))
        object.__setattr__(self, "_arr", arr)
        # H at the grid points k/m: sum of the k largest values, divided by m
        top = np.concatenate(([0.0], np.cumsum(arr[::-1]))) / arr.size
        object.__setattr__(self, "_cum", top)

    @property
    def m(self) -> int:
        return self._arr.size

    def _index(self, u):
        # number of sample points allowed above t; tiny slack absorbs k/m roundoff
        return np.floor(np.asarray(u, dtype=float) * self.m + 1e-9).astype(np.int64)

    def eval(self, u):
        _check_u(u)
        return float(self.eval_array(u))

    def eval_array(self, u):
        k = self._index(u)
        pos = self.m - k - 1
        out = np.where(pos >= 0, self._arr[np.clip(pos, 0, None)], 0.0)
        return out

    def tail(self, t):
        return float(self.m - np.searchsorted(self._arr, t, side="right")) / self.m

    def tail_ge(self, t):
        return float(self.m - np.searchsorted(self._arr, t, side="left")) / self.m

    def integrated(self, x):
        if not (0.0 <= x <= 1.0):
            raise DomainError(f"x must lie in [0, 1], got {x!r}")
        xm = x * self.m
        k = min(int(math.floor(xm)), self.m)
        rest = 0.0 if k >= self.m else (xm - k) * self._arr[self.m - k - 1] / self.m
        return float(self._cum[k] + rest)

    def moment(self, q):
        return float(np.mean(self._arr**q))

    def trunc_moment_le(self, q, a):
        kept = self._arr[self._arr <= a]
        return float(np.sum(kept**q) / self.m)


def quantile_eval(Q: QuantileFn, u: float) -> float:
    return Q.eval(u)


def integrated_quantile(Q: QuantileFn, x: float) -> float:
    """H(x) = int_0^x Q(u) du."""
    return Q.integrated(x)


def integrated_quantile_inverse(Q: QuantileFn, y: float, tol: float = 1e-13) -> float:
    """G(y) = inf{x : H(x) >= y}, capped at 1."""
    if y <= 0:
        return 0.0
    if y >= Q.integrated(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    # relative stopping rule: H is steep near 0, so x needs relative precision
    while hi - lo > tol * hi and hi > 1e-300:
        mid = 0.5 * (lo + hi) if lo > 0 and hi / lo < 4 else (math.sqrt(lo * hi) if lo > 0 else hi / 4)
        if Q.integrated(mid) >= y:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# decay sequences
# ---------------------------------------------------------------------------


class DecaySeq:
    """Non-increasing, nonnegative sequence k -> delta_k, k >= 0."""

    def value(self, k: int) -> float:
        raise NotImplementedError

    def scaled(self, factor: float) -> "DecaySeq":
        raise NotImplementedError

    def inverse(self, u: float) -> float:
        """inf{k >= 0 : delta_k <= u}; ``math.inf`` when the set is empty."""
        raise NotImplementedError

    def _fix(self, k: int, u: float) -> int:
        # nudge a closed-form guess onto the exact Galois boundary
        k = max(int(k), 0)
        while self.value(k) > u:
            k += 1
        while k > 0 and self.value(k - 1) <= u:
            k -= 1
        return k

    def __call__(self, k):
        return self.value(k)


@dataclass(frozen=True)
class Zero(DecaySeq):
    def value(self, k):
        return 0.0

    def scaled(self, factor):
        return self

    def inverse(self, u):
        return 0 if u >= 0 else INF


@dataclass(frozen=True)
class Power(DecaySeq):
    """delta_k = c k^(-theta) for k >= 1 and delta_0 = c * cap."""

    c: float = 1.0
    theta: float = 1.0
    cap: float = 1.0

    def __post_init__(self):
        if self.c < 0 or self.theta <= 0 or self.cap < 1:
            raise ValueError("Power needs c >= 0, theta > 0, cap >= 1")

    def value(self, k):
        if k == 0:
            return self.c * self.cap
        return self.c * float(k) ** (-self.theta)

    def scaled(self, factor):
        return Power(self.c * factor, self.theta, self.cap)

    def inverse(self, u):
        if u >= self.value(0):
            return 0
        if u <= 0:
            return INF if self.c > 0 else 0
        log_k = (math.log(self.c) - math.log(u)) / self.theta
        if log_k > 62 * math.log(2):
            # beyond integer resolution; ceil of a float is exact enough here
            return math.exp(log_k) if log_k < 700 else INF
        guess = math.ceil(math.exp(log_k))
        return self._fix(guess, u)


@dataclass(frozen=True)
class Geometric(DecaySeq):
    """delta_k = c r^k."""

    c: float = 1.0
    r: float = 0.5

    def __post_init__(self):
        if self.c < 0 or not (0.0 < self.r < 1.0):
            raise ValueError("Geometric needs c >= 0 and r in (0, 1)")

    def value(self, k):
        return self.c * self.r**k

    def scaled(self, factor):
        return Geometric(self.c * factor, self.r)

    def inverse(self, u):
        if u >= self.c:
            return 0
        if u <= 0:
            return INF
        guess = math.ceil(math.log(u / self.c) / math.log(self.r))
        return self._fix(guess, u)


@dataclass(frozen=True)
class Table(DecaySeq):
    """Finite non-increasing table; the last entry repeats forever."""

    values: tuple = (0.0,)

    def __post_init__(self):
        arr = tuple(float(v) for v in self.values)
        if not arr:
            raise ValueError("Table needs at least one value")
        if any(v < 0 for v in arr) or any(b > a for a, b in zip(arr, arr[1:])):
            raise ValueError("Table must be nonnegative and non-increasing")
        object.__setattr__(self, "values", arr)

    def value(self, k):
        return self.values[min(k, len(self.values) - 1)]

    def scaled(self, factor):
        return Table(tuple(v * factor for v in self.values))

    def inverse(self, u):
        for k, v in enumerate(self.values):
            if v <= u:
                return k
        return INF


def decay_inverse(delta: DecaySeq, u: float) -> float:
    if u < 0:
        raise DomainError("u must be >= 0")
    return delta.inverse(u)


# ---------------------------------------------------------------------------
# condition functionals
# ---------------------------------------------------------------------------


@dataclass
class ConditionReport:
    p: float
    t_grid: list
    values: list
    verdict_hint: str


def _product(k: float, q: float) -> float:
    if k == INF:
        return INF
    return k * q


def tau_profile(Q: QuantileFn, tau: DecaySeq) -> Callable[[float], float]:
    """u -> ((tau/2)^{-1} o H)(u) * Q(u); non-increasing in u."""
    half = tau.scaled(0.5)
    return lambda u: _product(half.inverse(Q.integrated(u)), Q.eval(u))


def alpha_profile(Q: QuantileFn, alpha: DecaySeq) -> Callable[[float], float]:
    """u -> alpha^{-1}(u) * Q(u); non-increasing in u."""
    return lambda u: _product(alpha.inverse(u), Q.eval(u))


def level_crossing(profile: Callable[[float], float], t: float, iters: int = 90) -> float:
    """sup{u in (0, 1] : profile(u) > t} for a non-increasing profile (0 if empty).

    Bisection runs in log(u) so boundaries far below 1 keep full relative precision.
    """
    if profile(1.0) > t:
        return 1.0
    lo, hi = math.log(1e-300), 0.0
    if profile(math.exp(lo)) <= t:
        return 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if profile(math.exp(mid)) > t:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return math.exp(0.5 * (lo + hi))


def _functional(p, Q, profile, t):
    if p <= 2:
        raise DomainError("p must exceed 2")
    if t <= 0:
        raise DomainError("t must be positive")
    Q.mean_abs()  # raises on non-integrable Q
    u_star = level_crossing(profile, t)
    return t ** (p - 1) * Q.integrated(u_star)


def condition_functional_tau(p: float, Q: QuantileFn, tau: DecaySeq, t: float) -> float:
    return _functional(p, Q, tau_profile(Q, tau), t)


def condition_functional_alpha(p: float, Q: QuantileFn, alpha: DecaySeq, t: float) -> float:
    return _functional(p, Q, alpha_profile(Q, alpha), t)


def raw_functional_quadrature(p, Q, profile, t, decades: int = 300) -> float:
    """Adaptive quadrature of the raw integrand Q(u) 1{profile(u) > t}.

    Independent of :func:`level_crossing`: (0, 1] is cut into decade panels,
    the panel holding the indicator's jump is split at the jump (located by
    plain bisection in u), and each constant piece goes to ``quad``.
    """

    def on(u):
        return profile(u) > t

    def quad(a, b):
        val, _ = integrate.quad(Q.eval, a, b, epsabs=0.0, epsrel=1e-12, limit=400)
        return val

    total, quiet = 0.0, 0
    for d in range(decades):
        a, b = 10.0 ** (-(d + 1)), 10.0 ** (-d)
        if on(b):
            piece = quad(a, b)
        elif on(a):
            lo, hi = a, b
            while hi - lo > 1e-15 * lo:
                mid = 0.5 * (lo + hi)
                if on(mid):
                    lo = mid
                else:
                    hi = mid
            piece = quad(a, lo)
        else:
            continue
        total += piece
        # the remaining decades add a geometrically shrinking tail
        quiet = quiet + 1 if piece <= 1e-17 * total else 0
        if quiet >= 3:
            break
    return t ** (p - 1) * total


def weak_lp_tail_functional(p: float, Q: QuantileFn, t: float, check: bool = True) -> float:
    """t^(p-1) E[|f| 1{|f| > t}] via t P(|f|>t) + int_t^inf P(|f|>u) du."""
    if t <= 0:
        raise DomainError("t must be positive")
    Q.mean_abs()
    tail_int, _ = integrate.quad(Q.tail, t, INF, epsabs=1e-13, epsrel=1e-11, limit=400)
    direct = t ** (p - 1) * (t * Q.tail(t) + tail_int)
    if check:
        via_quantile = t ** (p - 1) * Q.integrated(Q.tail(t))
        if not math.isclose(direct, via_quantile, rel_tol=1e-6, abs_tol=1e-300):
            raise ArithmeticError(
                f"tail decomposition {direct!r} disagrees with quantile form {via_quantile!r}"
            )
    return direct


def _trend(values: Sequence[float]) -> str:
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    if np.all(d <= 0) and v[-1] < v[0]:
        return "decreasing"
    if np.all(d >= 0) and v[-1] > v[0]:
        return "increasing"
    if np.allclose(v, v[0], rtol=1e-9):
        return "flat"
    return "mixed"


def condition_report(kind: str, p: float, Q: QuantileFn, seq: DecaySeq | None, t_grid) -> ConditionReport:
    if kind == "tau":
        vals = [condition_functional_tau(p, Q, seq, t) for t in t_grid]
    elif kind == "alpha":
        vals = [condition_functional_alpha(p, Q, seq, t) for t in t_grid]
    elif kind == "iid":
        vals = [weak_lp_tail_functional(p, Q, t) for t in t_grid]
    else:
        raise ValueError(f"unknown condition kind {kind!r}")
    return ConditionReport(p=p, t_grid=list(t_grid), values=vals, verdict_hint=_trend(vals))
