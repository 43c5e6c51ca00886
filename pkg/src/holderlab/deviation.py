"""Fuk-Nagaev bound for tau-dependent sequences and Shao's maximal inequality
for rho-mixing sequences, with Monte Carlo domination checks."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .processes import CausalLinear, GaussianAR1, IidModel, ModelError, sample_ensemble
from .quantile import (
    DecaySeq,
    QuantileFn,
    integrated_quantile_inverse,
    level_crossing,
    tau_profile,
)


def s_N_squared(model, N: int) -> float:
    """sum_{i,j <= N} |Cov(X_i, X_j)| from closed-form autocovariances."""
    if not hasattr(model, "autocov") or N < 1:
        raise ModelError("model has no covariance formula")
    total = N * abs(model.autocov(0))
    for k in range(1, N):
        c = model.autocov(k)
        if c == 0.0 and isinstance(model, (IidModel,)):
            break
        total += 2 * (N - k) * abs(c)
    return float(total)


def s_N_squared_tau_bound(N: int, Q: QuantileFn, tau: DecaySeq) -> float:
    """4N int_0^{||f||_1} (tau/2)^{-1}(u) Q(G(u)) du."""
    half = tau.scaled(0.5)
    top = Q.mean_abs()

    def integrand(u):
        k = half.inverse(u)
        if k == math.inf:
            return math.inf
        x = integrated_quantile_inverse(Q, u)
        return k * Q.eval(max(x, 1e-300))

    # integrand jumps where u crosses delta_k / 2
    pts = sorted({half.value(k) for k in range(0, 200) if 0 < half.value(k) < top})
    with warnings.catch_warnings():
        # step integrands trip quad's roundoff detector; the value is still accurate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, top, points=pts or None, limit=800, epsabs=1e-12)
    return 4.0 * N * val


@dataclass(frozen=True)
class FukNagaevInput:
    lam: float
    N: int
    r: float
    Q: QuantileFn
    tau: DecaySeq
    s2: float

    def __post_init__(self):
        if self.lam <= 0 or self.N < 1 or self.r < 1 or self.s2 < 0:
            raise ValueError("need lambda > 0, N >= 1, r >= 1, s_N^2 >= 0")


def fuk_nagaev_bound(inp: FukNagaevInput) -> float:
    """4 (1 + lam^2 / (r s2))^(-r/2) + (4N / lam) int_0^{S(lam / r)} Q."""
    if inp.s2 == 0:
        first = 0.0
    else:
        first = 4.0 * (1.0 + inp.lam**2 / (inp.r * inp.s2)) ** (-inp.r / 2.0)
    u_star = level_crossing(tau_profile(inp.Q, inp.tau), inp.lam / inp.r)
    second = 4.0 * inp.N / inp.lam * inp.Q.integrated(u_star)
    return first + second


def shao_threshold_A(x: float, N: int, dist: QuantileFn, tol: float = 1e-10) -> float:
    """Smallest A >= 0 with 2N E[|f| 1{|f| >= A}] <= x."""
    if x <= 0:
        raise ValueError("x must be positive")

    def ok(a):
        return 2 * N * dist.trunc_mean_ge(a) <= x

    if ok(0.0):
        return 0.0
    hi = 1.0
    while not ok(hi):
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("no finite threshold")
    lo = 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def rho_sum(rho: DecaySeq, N: int, power: float = 1.0, infinite: bool = False) -> float:
    """sum_{i=0}^{floor(log2 N)} rho(2^i)^power (or the whole series)."""
    if not infinite:
        top = int(math.floor(math.log2(N))) if N >= 1 else 0
        return float(sum(rho.value(2**i) ** power for i in range(top + 1)))
    total, i = 0.0, 0
    while True:
        term = rho.value(2**i) ** power
        total += term
        i += 1
        if term < 1e-10 * max(total, 1e-300) or i > 62:
            return total


@dataclass(frozen=True)
class ShaoInput:
    x: float
    N: int
    q: float
    K: float
    rho: DecaySeq
    dist: QuantileFn
    A: float | None = None


def _exp(z: float) -> float:
    return math.exp(z) if z < 700.0 else math.inf


def _shao_terms(inp: ShaoInput, A: float, infinite_sum: bool) -> float:
    f2 = math.sqrt(inp.dist.moment(2))
    e1 = _exp(inp.K * rho_sum(inp.rho, inp.N, 1.0, infinite_sum))
    e2 = _exp(inp.K * rho_sum(inp.rho, inp.N, 2.0 / inp.q, infinite_sum))
    first = inp.N * inp.dist.tail_ge(A) if A > 0 else float(inp.N)
    rest = inp.K * inp.x ** (-inp.q) * (
        inp.N ** (inp.q / 2) * e1 * f2**inp.q + inp.N * e2 * inp.dist.trunc_moment_le(inp.q, A)
    )
    return first + rest


def shao_bound(inp: ShaoInput, infinite_sum: bool = False) -> float:
    """Right-hand side of Shao's maximal inequality.

    With ``inp.A`` unset, the bound is minimized over admissible thresholds
    A >= A_min(x, N); the inequality holds for each of them.
    """
    if inp.q < 2:
        raise ValueError("q must be >= 2")
    if inp.A is not None:
        return _shao_terms(inp, inp.A, infinite_sum)
    a_min = shao_threshold_A(inp.x, inp.N, inp.dist)
    lo = max(a_min, 1e-12)
    hi = max(lo, inp.x) * 1e3
    grid = np.geomspace(lo, hi, 121)
    vals = [_shao_terms(inp, a, infinite_sum) for a in grid]
    k = int(np.argmin(vals))
    best = vals[k]
    if a_min == 0.0:
        best = min(best, _shao_terms(inp, 0.0, infinite_sum))
    res = optimize.minimize_scalar(
        lambda la: _shao_terms(inp, math.exp(la), infinite_sum),
        bounds=(math.log(grid[max(k - 1, 0)]), math.log(grid[min(k + 1, grid.size - 1)])),
        method="bounded",
    )
    return float(min(best, res.fun))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def running_max_abs(model, N_max: int, paths: int, seed) -> np.ndarray:
    x = sample_ensemble(model, N_max, paths, seed)
    return np.maximum.accumulate(np.abs(np.cumsum(x, axis=1)), axis=1)


@dataclass
class TailCheck:
    N: int
    level: float
    bound: float
    empirical: float
    std_error: float

    @property
    def dominated(self) -> bool:
        return self.empirical + 3 * self.std_error <= self.bound

    def row(self, model_id: str) -> dict:
        return {
            "model": model_id, "N": self.N, "lambda_or_x": self.level, "bound": self.bound,
            "empirical": self.empirical, "stderr": self.std_error, "dominated": self.dominated,
        }


def empirical_tail(maxima: np.ndarray, N: int, level: float) -> tuple[float, float]:
    """P{max_{i<=N} |S_i| >= level} with binomial standard error."""
    hits = maxima[:, N - 1] >= level
    p = float(hits.mean())
    return p, math.sqrt(p * (1 - p) / hits.size)


def fuk_nagaev_check(model: CausalLinear, Q: QuantileFn, tau: DecaySeq, N: int, r: float,
                     lambdas, paths: int, seed) -> list[TailCheck]:
    s2 = s_N_squared(model, N)
    maxima = running_max_abs(model, N, paths, seed)
    out = []
    for lam in lambdas:
        b = fuk_nagaev_bound(FukNagaevInput(lam, N, r, Q, tau, s2))
        p, se = empirical_tail(maxima, N, 5 * lam)
        out.append(TailCheck(N, float(lam), b, p, se))
    return out


def default_K_grid(k_min: float = 1e-3, k_max: float = 1e3, per_decade: int = 8) -> np.ndarray:
    steps = int(round(math.log10(k_max / k_min) * per_decade))
    return k_min * 10.0 ** (np.arange(steps + 1) / per_decade)


@dataclass
class ShaoCalibration:
    K: float | None
    grid_index: int | None
    checks: list
    K_grid: np.ndarray

    @property
    def success(self) -> bool:
        return self.K is not None


def shao_checks(model, dist, rho, q, K, N_grid, x_of_N, maxima) -> list[TailCheck]:
    out = []
    for N in N_grid:
        for x in x_of_N(N):
            b = shao_bound(ShaoInput(x, N, q, K, rho, dist))
            p, se = empirical_tail(maxima, N, x)
            out.append(TailCheck(N, float(x), b, p, se))
    return out


def calibrate_shao_K(model, q: float, N_grid, x_of_N, paths: int, seed,
                     K_grid=None, dist: QuantileFn | None = None) -> ShaoCalibration:
    """Smallest K on the grid whose bound dominates every empirical tail + 3 s.e.

    ``x_of_N`` maps N to its list of thresholds x.
    """
    if not hasattr(model, "rho"):
        raise ModelError("model declares no rho-mixing sequence")
    dist = dist or getattr(model, "marginal", None) or model.dist
    K_grid = default_K_grid() if K_grid is None else np.asarray(K_grid, dtype=float)
    maxima = running_max_abs(model, max(N_grid), paths, seed)

    def run(idx):
        return shao_checks(model, dist, model.rho, q, K_grid[idx], N_grid, x_of_N, maxima)

    # the bound increases with K, so domination is monotone along the grid
    top = run(K_grid.size - 1)
    if not all(c.dominated for c in top):
        return ShaoCalibration(None, None, [], K_grid)
    lo, hi, hi_checks = -1, K_grid.size - 1, top
    while hi - lo > 1:
        mid = (lo + hi) // 2
        checks = run(mid)
        if all(c.dominated for c in checks):
            hi, hi_checks = mid, checks
        else:
            lo = mid
    return ShaoCalibration(float(K_grid[hi]), hi, hi_checks, K_grid)
