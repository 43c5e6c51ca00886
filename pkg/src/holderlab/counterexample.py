"""A stationary coboundary-plus-martingale sequence that is bounded in L^p but
not tight in the Hölder space of exponent 1/2 - 1/p.

The system is the dyadic odometer (binary adding machine) with fair-coin
measure. For a tower height N = 2^b the base A = {first b bits are 0} gives
exact towers: T^m A = {first b bits encode m}, 0 <= m < N, partition the
space. The state is kept as one integer J (bits, least significant first), so
the level-l position is J mod N_l and time shifts add to J.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .holder import PartialSumPath, dyadic_levels, holder_stat_fast
from .processes import Trajectory

MAX_BITS = 4096
STATE_MARGIN_BITS = 8
INT64_SAFE = 2**62
EXACT_EVENT_MAX_N = 4096


class InvalidTowerError(ValueError):
    pass


class BudgetError(ValueError):
    pass


@dataclass(frozen=True)
class TowerParams:
    p: float
    b: tuple
    K: tuple
    certificates: dict = field(default_factory=dict, compare=False)
    tail_bound_per_step: float = 0.0  # sum over omitted levels of 1/N_l
    tail_bound_const: float = 0.0  # sum over omitted levels of 2K_l/N_l

    @property
    def l_max(self) -> int:
        return len(self.b)

    @property
    def N(self) -> tuple:
        return tuple(2**bl for bl in self.b)

    def scale(self, l: int) -> float:
        """N_l^(1/p) / K_l^(1/2 + 1/p), computed in logs (N_l may be huge)."""
        bl, kl = self.b[l - 1], self.K[l - 1]
        return 2.0 ** (bl / self.p - math.log2(kl) * (0.5 + 1.0 / self.p))

    def omitted_level_bound(self, horizon: int) -> float:
        """Bound on P(some level > l_max is nonzero at a time in [0, horizon])."""
        return self.tail_bound_const + horizon * self.tail_bound_per_step


def _next_b(p: float, l: int, b_prev: int) -> int:
    # smallest power of two strictly greater than (4 l N_{l-1})^p
    x = p * (math.log2(4 * l) + b_prev)
    return int(math.floor(x)) + 1


def certify(p: float, b, K, ratio_sum_cap: float = 1.0) -> dict:
    """Finite certificates for the tower conditions; each value is a bool."""
    N = [2**bl for bl in b]
    L = len(b)
    cert = {}
    cert["4K<=N"] = all(4 * k <= n for k, n in zip(K, N))
    cert["increasing"] = all(b[i] < b[i + 1] and K[i] < K[i + 1] for i in range(L - 1))
    # 4 N_l^{-1/p} l N_{l-1} < 1, in logs
    cert["block-gap"] = all(
        math.log2(4 * l) + b[l - 2] - b[l - 1] / p < 0 for l in range(2, L + 1)
    )
    cert["sqrt-K-dominance"] = all(
        sum(math.sqrt(K[i]) for i in range(l)) <= math.sqrt(K[l]) for l in range(1, L)
    )
    partial = np.cumsum([K[i] / math.sqrt(K[i + 1]) for i in range(L - 1)]) if L > 1 else np.zeros(1)
    cert["K-ratio-sum"] = bool(np.all(partial <= ratio_sum_cap))
    # surrogate for the limit condition: N_l sum_{l'>l} K_l'/N_l' decreasing in l
    surrogate = [
        sum(2.0 ** (b[l - 1] + math.log2(K[j]) - b[j]) for j in range(l, L)) for l in range(1, L)
    ]
    cert["tail-mass-decreasing"] = all(x > y for x, y in zip(surrogate, surrogate[1:]))
    cert["tail-mass-values"] = surrogate
    return cert


def _omitted_bounds(p, b):
    per_step = const = 0.0
    bl = b[-1]
    for l in range(len(b) + 1, len(b) + 3):
        bl = _next_b(p, l, bl)
        kl = bl // 2
        per_step += 2.0 ** (-bl)
        const += 2.0 ** (kl + 1 - bl)
    return per_step, const


def make_tower_params(p: float = 3.0, l_max: int = 3, b1: int = 4) -> TowerParams:
    """N_1 = 2^b1, N_l = next power of two above (4 l N_{l-1})^p, K_l = 2^(b_l // 2)."""
    if p <= 2:
        raise ValueError("p must exceed 2")
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    b = [b1]
    for l in range(2, l_max + 1):
        nb = _next_b(p, l, b[-1])
        if nb > MAX_BITS:
            raise BudgetError(f"b_{l} = {nb} bits exceeds budget; largest feasible l_max is {l - 1}")
        b.append(nb)
    K = [2 ** (bl // 2) for bl in b]
    return tower_from(p, b, K)


def tower_from(p: float, b, K, validate: bool = True) -> TowerParams:
    b, K = tuple(int(x) for x in b), tuple(int(x) for x in K)
    if len(b) != len(K) or not b:
        raise ValueError("b and K must be non-empty and of equal length")
    if any(k < 1 for k in K):
        raise ValueError("K_l must be >= 1")
    cert = certify(p, b, K)
    if validate:
        failed = [k for k, v in cert.items() if isinstance(v, bool) and not v]
        if failed:
            raise InvalidTowerError(f"tower conditions violated: {failed}")
    elif any(2 * k > 2**bl for k, bl in zip(K, b)):
        raise InvalidTowerError("need 2K_l <= N_l for the tent to fit in the tower")
    per_step, const = _omitted_bounds(p, b)
    return TowerParams(p=p, b=b, K=K, certificates=cert, tail_bound_per_step=per_step,
                       tail_bound_const=const)


# ---------------------------------------------------------------------------
# odometer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OdometerState:
    J: int
    nbits: int

    def position(self, params: TowerParams, l: int) -> int:
        return self.J % (2 ** params.b[l - 1])

    def shifted(self, i: int) -> "OdometerState":
        return OdometerState((self.J + i) % (2**self.nbits), self.nbits)


def state_bits(params: TowerParams) -> int:
    return params.b[-1] + STATE_MARGIN_BITS


def random_states(params: TowerParams, m: int, rng: np.random.Generator) -> list[OdometerState]:
    nbits = state_bits(params)
    words = -(-nbits // 32)
    raw = rng.integers(0, 2**32, size=(m, words), dtype=np.uint64)
    mask = (1 << nbits) - 1
    out = []
    for row in raw:
        J = 0
        for w in row:
            J = (J << 32) | int(w)
        out.append(OdometerState(J & mask, nbits))
    return out


def odometer_step(bits: list[int]) -> list[int]:
    """Add one with carry; bits are least significant first."""
    out = list(bits)
    for k in range(len(out)):
        if out[k] == 0:
            out[k] = 1
            return out
        out[k] = 0
    return out


def g_level_value(params: TowerParams, l: int, m: int) -> float:
    """Value of g_l on the tower rung T^m A_l."""
    N, K = 2 ** params.b[l - 1], params.K[l - 1]
    if not (0 <= m < N):
        raise ValueError(f"level index {m} outside [0, {N})")
    j = N - m
    if 1 <= j <= K:
        return params.scale(l) * j
    if K < j <= 2 * K - 1:
        return params.scale(l) * (2 * K - j)
    return 0.0


@dataclass
class GValue:
    value: float
    omitted_bound: float


def eval_g(params: TowerParams, state: OdometerState, i: int = 0) -> GValue:
    """g(T^i omega) = sum over levels l <= l_max of g_l at position (j_l + i) mod N_l."""
    if state.nbits < params.b[-1]:
        raise ValueError("state carries too few bits for the tower")
    total = 0.0
    for l in range(1, params.l_max + 1):
        N = 2 ** params.b[l - 1]
        total += g_level_value(params, l, (state.J + i) % N)
    return GValue(total, params.omitted_level_bound(max(i, 1)))


def level_offsets(params: TowerParams, states) -> np.ndarray:
    """d_l = (-J) mod N_l per state and level, clipped to int64 range.

    g_l at time i depends on jj = (d_l - i) mod N_l through the tent profile.
    """
    out = np.empty((len(states), params.l_max), dtype=np.int64)
    for r, st in enumerate(states):
        for l in range(params.l_max):
            N = 2 ** params.b[l]
            out[r, l] = min((-st.J) % N, INT64_SAFE)
    return out


def g_matrix(params: TowerParams, offsets: np.ndarray, times) -> np.ndarray:
    """g at the given times for each state row; times must satisfy 0 <= t < 2^61."""
    times = np.asarray(times, dtype=np.int64)
    if times.ndim == 1:
        times = np.broadcast_to(times, (offsets.shape[0], times.size))
    out = np.zeros(times.shape)
    for l in range(params.l_max):
        bl, K = params.b[l], params.K[l]
        d = offsets[:, l][:, None]
        if bl <= 62:
            jj = (d - times) % (2**bl)
        else:
            # d was clipped; a negative difference wraps to ~N_l, outside the tent
            jj = d - times
            jj = np.where(jj < 0, INT64_SAFE, jj)
        tent = np.where(jj <= K, jj, 2 * K - jj)
        tent = np.where((jj >= 1) & (jj <= 2 * K - 1), tent, 0)
        out += params.scale(l + 1) * tent
    return out


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_increments(params: TowerParams, sigma_m: float, n: int, m: int,
                      rng: np.random.Generator) -> np.ndarray:
    """(m, n) array of X_j = m_j + g(T^j) - g(T^(j+1)), j = 1..n."""
    states = random_states(params, m, rng)
    offs = level_offsets(params, states)
    g = g_matrix(params, offs, np.arange(1, n + 2))
    x = g[:, :-1] - g[:, 1:]
    if sigma_m > 0:
        x = x + sigma_m * rng.choice(np.array([-1.0, 1.0]), size=(m, n))
    return x


def sample_f_path(params: TowerParams, sigma_m: float, n: int, seed):
    rng = np.random.default_rng(seed)
    x = sample_increments(params, sigma_m, n, 1, rng)[0]
    return Trajectory(values=x, model_id=f"counterexample:{params.p:g}", master_seed=seed), \
        PartialSumPath.from_increments(x)


# ---------------------------------------------------------------------------
# non-tightness statistics
# ---------------------------------------------------------------------------


@dataclass
class EventEstimate:
    level: int
    probability: float
    std_error: float
    paths: int
    method: str


def _event_exact(params, l, offsets, alpha, thresh):
    N = 2 ** params.b[l - 1]
    g = g_matrix(params, offsets, np.arange(1, N + 1))
    return holder_stat_fast(g, alpha) >= thresh * (1 - 1e-12)


def _event_sparse(params, l, offsets, alpha, thresh):
    """Lower bound of the pair maximum from the level-l support window.

    Pairs restricted to a contiguous stretch of times are admissible pairs,
    and the dyadic window statistic never exceeds the exact maximum, so the
    event indicator computed here can only under-report.
    """
    N, K = 2 ** params.b[l - 1], params.K[l - 1]
    jj = np.arange(2 * K, -1, -1, dtype=np.int64)  # tent support plus both zero ends
    hits = np.zeros(offsets.shape[0], dtype=bool)
    for r in range(offsets.shape[0]):
        d = int(offsets[r, l - 1])
        times = (d - jj - 1) % N + 1  # residues in [1, N]
        cut = np.nonzero(np.diff(times) != 1)[0]
        best = 0.0
        for piece in np.split(times, cut + 1):
            if piece.size < 2:
                continue
            vals = g_matrix(params, offsets[r : r + 1], piece)[0]
            best = max(best, float(dyadic_levels(vals, alpha).max()))
        hits[r] = best >= thresh * (1 - 1e-12)
    return hits


def holder_event_probability(params: TowerParams, l: int, paths: int, seed,
                             method: str = "auto") -> EventEstimate:
    """P{ max_{1<=i<i'<=N_l} |g(T^i') - g(T^i)| / (i'-i)^(1/2-1/p) >= N_l^(1/p) / 2 }."""
    if not (1 <= l <= params.l_max):
        raise ValueError("level outside the tower")
    N = 2 ** params.b[l - 1]
    if method == "auto":
        method = "exact" if N <= EXACT_EVENT_MAX_N else "sparse"
    if method == "exact" and N > 2**15:
        raise BudgetError(f"N_{l} = {N} too large for exact evaluation")
    if method == "sparse" and params.K[l - 1] > 2**16:
        raise BudgetError(f"K_{l} too large for sparse evaluation")
    rng = np.random.default_rng(seed)
    offsets = level_offsets(params, random_states(params, paths, rng))
    alpha = 0.5 - 1.0 / params.p
    thresh = 2.0 ** (params.b[l - 1] / params.p) / 2.0
    fn = _event_exact if method == "exact" else _event_sparse
    hits = fn(params, l, offsets, alpha, thresh)
    prob = float(hits.mean())
    return EventEstimate(l, prob, math.sqrt(prob * (1 - prob) / paths), paths, method)


@dataclass
class LpRatio:
    n: int
    estimate: float
    std_error: float
    coboundary_norm_ratio: float | None = None


def lp_ratio(params: TowerParams, p: float, sigma_m: float, n_grid, paths: int, seed) -> list[LpRatio]:
    """Monte Carlo E|S_n(f)|^p / n^(p/2) using S_n = sum m_j + g(T) - g(T^(n+1))."""
    rng = np.random.default_rng(seed)
    out = []
    for n in n_grid:
        offs = level_offsets(params, random_states(params, paths, rng))
        g = g_matrix(params, offs, np.array([1, n + 1]))
        cob = g[:, 0] - g[:, 1]
        mart = sigma_m * (2.0 * rng.binomial(n, 0.5, size=paths) - n) if sigma_m > 0 else 0.0
        vals = np.abs(mart + cob) ** p / n ** (p / 2)
        norm = None
        if sigma_m == 0:
            norm = float(np.mean(np.abs(cob) ** p) ** (1 / p) / math.sqrt(n))
        out.append(LpRatio(int(n), float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(paths)), norm))
    return out


def exact_level_lp_norm(params: TowerParams, l: int, n: int, p: float) -> float:
    """||g_l - g_l o T^n||_p by enumerating all N_l rungs (small towers only)."""
    N = 2 ** params.b[l - 1]
    if N > 2**20:
        raise BudgetError("tower too tall for enumeration")
    vals = np.array([g_level_value(params, l, m) for m in range(N)])
    diff = vals - np.roll(vals, -n)
    return float(np.mean(np.abs(diff) ** p) ** (1 / p))
