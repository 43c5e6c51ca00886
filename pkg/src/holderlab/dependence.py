"""Exact alpha/rho coefficients on finite partitions and tau for causal linear models."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .processes import CausalLinear
from .quantile import QuantileFn

MAX_CELLS = 12
ATOM_BUDGET = 2**16
INNER_DRAWS = 10_000


class SizeError(ValueError):
    pass


@dataclass(frozen=True)
class FinitePartitionPair:
    joint: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.joint, dtype=float)
        if p.ndim != 2:
            raise ValueError("joint must be a matrix")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("joint must be nonnegative and sum to 1")
        object.__setattr__(self, "joint", p)


def _subset_indicators(k: int) -> np.ndarray:
    return np.array(list(itertools.product((0.0, 1.0), repeat=k)))


def alpha_exact(pair: FinitePartitionPair) -> float:
    """sup |P(A and B) - P(A)P(B)| over unions of rows A and unions of columns B."""
    p = pair.joint
    r, c = p.shape
    if r > MAX_CELLS or c > MAX_CELLS:
        raise SizeError(f"partitions limited to {MAX_CELLS} cells, got {p.shape}")
    ir, ic = _subset_indicators(r), _subset_indicators(c)
    joint = ir @ p @ ic.T
    gap = joint - np.outer(ir @ p.sum(axis=1), ic @ p.sum(axis=0))
    return float(np.abs(gap).max())


def rho_exact(pair: FinitePartitionPair) -> float:
    """Maximal correlation: second singular value of p_ij / sqrt(p_i. p_.j)."""
    p = pair.joint
    if p.shape[0] > MAX_CELLS or p.shape[1] > MAX_CELLS:
        raise SizeError(f"partitions limited to {MAX_CELLS} cells, got {p.shape}")
    rows, cols = p.sum(axis=1), p.sum(axis=0)
    p = p[rows > 0][:, cols > 0]
    rows, cols = rows[rows > 0], cols[cols > 0]
    if min(p.shape) < 2:
        return 0.0
    sv = np.linalg.svd(p / np.sqrt(np.outer(rows, cols)), compute_uv=False)
    return float(min(max(sv[1], 0.0), 1.0))


# ---------------------------------------------------------------------------
# tau for causal linear processes
# ---------------------------------------------------------------------------


class StepCDF:
    """Distribution function of a finite discrete law, with its running integral."""

    def __init__(self, atoms, weights=None):
        atoms = np.asarray(atoms, dtype=float)
        w = np.full(atoms.size, 1.0 / atoms.size) if weights is None else np.asarray(weights, float)
        order = np.argsort(atoms, kind="stable")
        atoms, w = atoms[order], w[order]
        self.atoms, idx = np.unique(atoms, return_index=True)
        self.cum = np.cumsum(np.add.reduceat(w, idx))
        self.cum /= self.cum[-1]
        # J(atom_k) = int_{-inf}^{atom_k} F
        self._J = np.concatenate(([0.0], np.cumsum(self.cum[:-1] * np.diff(self.atoms))))

    def cdf(self, x):
        k = np.searchsorted(self.atoms, x, side="right") - 1
        return np.where(k >= 0, self.cum[np.clip(k, 0, None)], 0.0)

    def J(self, x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.atoms, x, side="right") - 1
        kc = np.clip(k, 0, None)
        val = self._J[kc] + self.cum[kc] * (x - self.atoms[kc])
        return np.where(k >= 0, val, 0.0)

    def quantile(self, level):
        """inf{x : F(x) >= level}."""
        k = np.searchsorted(self.cum, np.asarray(level) - 1e-15, side="left")
        return self.atoms[np.clip(k, 0, self.atoms.size - 1)]

    def mean(self) -> float:
        pmf = np.diff(np.concatenate(([0.0], self.cum)))
        return float(pmf @ self.atoms)


def l1_cdf_gap(shifts: np.ndarray, offsets: np.ndarray, levels: np.ndarray, G: StepCDF) -> np.ndarray:
    """int |F_c - G| for each row c, where F_c has atoms ``offsets + shift_c``.

    ``offsets`` are sorted and ``levels[k] = F(offsets[k])``. This is the
    Wasserstein-1 distance of the two laws (one-dimensional identity).
    """
    x = shifts[:, None] + offsets[None, :]  # (m, k)
    total = G.J(x[:, 0])  # left tail: F = 0
    right = np.maximum(x[:, -1], G.atoms[-1])
    total = total + (right - x[:, -1]) - (G.J(right) - G.J(x[:, -1]))  # right tail: F = 1
    for k in range(offsets.size - 1):
        a, b, L = x[:, k], x[:, k + 1], levels[k]
        mid = np.clip(G.quantile(L), a, b)
        Ja, Jm, Jb = G.J(a), G.J(mid), G.J(b)
        total = total + L * (mid - a) - (Jm - Ja) + (Jb - Jm) - L * (b - mid)
    return total


@dataclass
class TauEstimate:
    lag: int
    value: float
    std_error: float
    truncation_depth: int
    truncated: bool = False


def _enumerate_sums(coeffs: np.ndarray, values: np.ndarray) -> np.ndarray:
    sums = np.zeros(1)
    for a in coeffs:
        sums = (sums[:, None] + a * values[None, :]).ravel()
    return sums


def marginal_law(model: CausalLinear, truncation_depth: int | None = None) -> StepCDF:
    """Discretized marginal of X: exact enumeration of the leading coefficients,
    remaining coefficients replaced by their mean contribution."""
    a = model.a[: truncation_depth or None]
    if model.finite:
        vals = np.asarray(model.innovation)
        lead = max(1, int(math.floor(math.log(ATOM_BUDGET) / math.log(max(vals.size, 2)))))
        lead = min(lead, a.size)
        atoms = _enumerate_sums(a[:lead], vals) + model.innov_mean * a[lead:].sum()
        return StepCDF(atoms)
    sd = math.sqrt(float(np.sum(a**2)))
    u = (np.arange(ATOM_BUDGET) + 0.5) / ATOM_BUDGET
    return StepCDF(sd * stats.norm.ppf(u))


def _folded_normal_mean(mu: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0.0:
        return np.abs(mu)
    z = mu / sigma
    return sigma * math.sqrt(2 / math.pi) * np.exp(-0.5 * z * z) + mu * (1 - 2 * stats.norm.cdf(-z))


def tau_estimate_1d(model: CausalLinear, i: int, truncation_depth: int | None = None,
                    paths: int = 10_000, seed=0) -> TauEstimate:
    """Monte Carlo tau(i) = E W1(law(X_{p+i} | past innovations), law(X)).

    Given the innovations up to time p, X_{p+i} = Y_i + c with
    Y_i = sum_{j<i} a_j eps_{p+i-j} fresh and c fixed by the past.
    """
    if not isinstance(model, CausalLinear):
        raise TypeError("tau_estimate_1d needs a causal linear model")
    if i < 1:
        raise ValueError("lag must be >= 1")
    a = model.a
    depth = a.size if truncation_depth is None else min(truncation_depth, a.size)
    residual = float(np.abs(a[depth:]).sum())
    truncated = residual > 1e-9
    if truncated:
        warnings.warn(f"coefficient mass {residual:.3g} beyond depth {depth}", RuntimeWarning)
    rng = np.random.default_rng(seed)
    G = marginal_law(model, depth) if model.finite else None

    fresh = a[: min(i, depth)]
    if model.finite:
        vals = np.asarray(model.innovation)
        if vals.size ** fresh.size <= 4096:
            offsets = _enumerate_sums(fresh, vals)
        else:
            idx = rng.integers(0, vals.size, size=(INNER_DRAWS, fresh.size))
            offsets = vals[idx] @ fresh
        past_coef = a[i:depth]
        past = vals[rng.integers(0, vals.size, size=(paths, past_coef.size))] @ past_coef
    else:
        past_coef = a[i:depth]
        past = rng.standard_normal((paths, past_coef.size)) @ past_coef
    past = past + model.innov_mean * a[depth:].sum()
    if model.finite:
        F = StepCDF(offsets)
        gaps = l1_cdf_gap(past, F.atoms, F.cum, G)
    else:
        # W1(N(c, s1^2), N(0, s^2)) = E|c + (s1 - s) Z| under the quantile coupling
        s1 = math.sqrt(float(np.sum(fresh**2)))
        s = math.sqrt(float(np.sum(a[:depth] ** 2)))
        gaps = _folded_normal_mean(past, abs(s1 - s))
    return TauEstimate(
        lag=i,
        value=float(gaps.mean()),
        std_error=float(gaps.std(ddof=1) / math.sqrt(paths)),
        truncation_depth=depth,
        truncated=truncated,
    )


def tau_alpha_bound_check(tau_val: float, alpha_val: float, Q: QuantileFn, margin: float = 0.0) -> bool:
    """tau <= 2 int_0^{2 alpha} Q, with an optional Monte Carlo margin on tau."""
    if tau_val < 0 or not (0.0 <= alpha_val <= 0.25):
        raise ValueError("need tau >= 0 and alpha in [0, 1/4]")
    return tau_val - margin <= 2.0 * Q.integrated(min(1.0, 2.0 * alpha_val))
