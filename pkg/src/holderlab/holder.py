"""Partial-sum polygonal process and grid Hölder statistics.

The canonical statistic is the vertex-pair maximum
``max_{1 <= i < i' <= n} |S_i' - S_i| / (i' - i)^alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EXACT_MAX_N = 2**15
ROW_CHUNK = 64


class SizeError(ValueError):
    pass


@dataclass
class PartialSumPath:
    sums: np.ndarray

    def __post_init__(self):
        self.sums = np.asarray(self.sums, dtype=float)
        if self.sums.ndim != 1 or self.sums.size < 1 or self.sums[0] != 0.0:
            raise ValueError("sums must be a 1-d array starting with S_0 = 0")

    @classmethod
    def from_increments(cls, x) -> "PartialSumPath":
        return cls(np.concatenate(([0.0], np.cumsum(np.asarray(x, dtype=float)))))

    @property
    def n(self) -> int:
        return self.sums.size - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.sums)


@dataclass
class HolderStat:
    value: float
    alpha: float
    method: str
    argmax: tuple | None = None


def polygonal_eval(S: PartialSumPath, t: float) -> float:
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t!r}")
    nt = S.n * t
    k = min(int(math.floor(nt)), S.n)
    if k == S.n:
        return float(S.sums[-1])
    return float(S.sums[k] + (nt - k) * (S.sums[k + 1] - S.sums[k]))


def _check(S: PartialSumPath, alpha: float):
    if S.n < 2:
        raise ValueError("need n >= 2")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")


def _pairwise_max(s: np.ndarray, alpha: float, max_span: int):
    """Exact max over spans 1..max_span of |s[j] - s[i]| / (j - i)^alpha."""
    best, arg = -1.0, None
    for d in range(1, max_span + 1):
        diff = np.abs(s[d:] - s[:-d])
        k = int(np.argmax(diff))
        val = diff[k] / d**alpha
        if val > best:
            best, arg = val, (k, k + d)
    return best, arg


def holder_stat_exact(S: PartialSumPath, alpha: float) -> HolderStat:
    _check(S, alpha)
    if S.n > EXACT_MAX_N:
        raise SizeError(f"n={S.n} exceeds {EXACT_MAX_N}; use holder_stat_dyadic")
    s = S.sums[1:]
    val, (i, j) = _pairwise_max(s, alpha, S.n - 1)
    return HolderStat(float(val), alpha, "exact", (i + 1, j + 1))


def _window_ranges(s: np.ndarray) -> list[np.ndarray]:
    """ranges[j][i] = max - min of s over indices [i, min(i + 2^j, end)].

    Sparse table over 2^j-point blocks; two shifted blocks give the 2^j-step window.
    """
    last = s.shape[-1] - 1
    pos = np.arange(s.shape[-1])
    hi, lo = s, s  # blocks of 2^j points starting at i (clipped at the end)
    out = []
    j = 0
    while True:
        nxt = np.minimum(pos + 1, last)
        out.append(np.maximum(hi, hi[..., nxt]) - np.minimum(lo, lo[..., nxt]))
        if 2**j >= last:
            return out
        idx = np.minimum(pos + 2**j, last)
        hi = np.maximum(hi, hi[..., idx])
        lo = np.minimum(lo, lo[..., idx])
        j += 1


def dyadic_levels(s: np.ndarray, alpha: float) -> np.ndarray:
    """Per-level normalized window ranges M_j / 2^(j alpha), j = 0.. (last axis reduced)."""
    ranges = _window_ranges(s)
    return np.stack([r.max(axis=-1) / 2.0 ** ((j) * alpha) for j, r in enumerate(ranges)], axis=-1)


def dyadic_constant(alpha: float) -> float:
    return 2.0 / (1.0 - 2.0 ** (alpha - 1.0))


def holder_stat_dyadic(S: PartialSumPath, alpha: float) -> HolderStat:
    """O(n log n) statistic from dyadic window ranges.

    Level j holds the largest oscillation of S over windows spanning 2^j steps,
    divided by 2^(j alpha). A span d with 2^(j-1) < d <= 2^j fits in one such
    window, so dyadic <= exact <= 2^alpha * dyadic.
    """
    _check(S, alpha)
    s = S.sums[1:]
    # level j in the table has window 2^j steps at index j (step 1 -> j=0 ... )
    ranges = _window_ranges(s)
    vals = [r.max() / 2.0 ** (j * alpha) for j, r in enumerate(ranges)]
    return HolderStat(float(max(vals)), alpha, "dyadic")


def scaled_holder_modulus(S: PartialSumPath, alpha: float, delta: float = 1.0) -> tuple[float, bool]:
    """n^(alpha - 1/2) max over spans < delta n of |S_i' - S_i| / (i' - i)^alpha.

    Returns ``(value, empty)``; ``empty`` flags delta * n <= 1 (no admissible span).
    """
    _check(S, alpha)
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    max_span = min(int(math.ceil(delta * S.n)) - 1, S.n - 1)
    if max_span < 1:
        return 0.0, True
    if max_span == S.n - 1:
        val = holder_stat_fast(S.sums[1:][None, :], alpha)[0]
    else:
        val, _ = _pairwise_max(S.sums[1:], alpha, max_span)
    return float(S.n ** (alpha - 0.5) * val), False


def _sparse_tables(s: np.ndarray):
    """Block max/min tables: hi[k][..., i] = max of s[..., i : i + 2^k].

    Entries whose block would run past the end are left partially filled and
    must not be read.
    """
    n_pts = s.shape[-1]
    hi, lo = [s], [s]
    k = 0
    while 2 ** (k + 1) <= n_pts:
        h = 2**k
        nh, nl = hi[-1].copy(), lo[-1].copy()
        np.maximum(hi[-1][..., : n_pts - h], hi[-1][..., h:], out=nh[..., : n_pts - h])
        np.minimum(lo[-1][..., : n_pts - h], lo[-1][..., h:], out=nl[..., : n_pts - h])
        hi.append(nh)
        lo.append(nl)
        k += 1
    return hi, lo


def window_range_max(s: np.ndarray, widths) -> np.ndarray:
    """For each span w in ``widths``: max over i of the oscillation on [i, i + w]."""
    hi, lo = _sparse_tables(s)
    n_pts = s.shape[-1]
    out = np.empty(s.shape[:-1] + (len(widths),))
    for c, w in enumerate(widths):
        pts = int(w) + 1
        k = int(math.floor(math.log2(pts)))
        count = n_pts - int(w)
        off = pts - 2**k
        mx = np.maximum(hi[k][..., :count], hi[k][..., off : off + count])
        mn = np.minimum(lo[k][..., :count], lo[k][..., off : off + count])
        out[..., c] = (mx - mn).max(axis=-1)
    return out


def _width_grid(last: int, per_octave: int = 8) -> np.ndarray:
    top = math.log2(max(last, 1))
    ws = {int(math.ceil(2 ** (t / per_octave))) for t in range(int(math.ceil(top * per_octave)) + 1)}
    ws = sorted(w for w in ws if w <= last)
    if not ws or ws[-1] != last:
        ws.append(last)
    return np.asarray(ws)


def holder_stat_fast(s: np.ndarray, alpha: float) -> np.ndarray:
    """Exact grid statistic for each row of ``s`` (rows are S_1..S_n).

    Every span d is bounded by the largest oscillation over windows of a
    slightly larger width; spans are visited by decreasing bound and the scan
    stops once no bound can beat the running maximum.
    """
    s = np.atleast_2d(np.asarray(s, dtype=float))
    m, n = s.shape
    if n < 2:
        raise ValueError("need n >= 2")
    if m > ROW_CHUNK:
        return np.concatenate([holder_stat_fast(s[i : i + ROW_CHUNK], alpha) for i in range(0, m, ROW_CHUNK)])
    widths = _width_grid(n - 1)
    wmax = window_range_max(s, widths)  # (m, W)
    best = (wmax / widths.astype(float) ** alpha).max(axis=1)
    spans = np.arange(1, n)
    slot = np.searchsorted(widths, spans, side="left")
    out = np.empty(m)
    for r in range(m):
        bound = wmax[r, slot] / spans**alpha
        cand = np.nonzero(bound > best[r])[0]
        order = cand[np.argsort(-bound[cand], kind="stable")]
        cur = best[r]
        row = s[r]
        for d_idx in order:
            if bound[d_idx] <= cur:
                break
            d = d_idx + 1
            v = np.abs(row[d:] - row[:-d]).max() / d**alpha
            if v > cur:
                cur = v
        out[r] = cur
    return out


def scaled_statistic_ensemble(paths: np.ndarray, alpha: float, scale: float = 1.0,
                              method: str = "exact") -> np.ndarray:
    """n^(alpha - 1/2) * grid statistic / scale for each row of increments."""
    paths = np.atleast_2d(paths)
    n = paths.shape[1]
    s = np.cumsum(paths, axis=1)
    if method == "exact":
        raw = holder_stat_fast(s, alpha)
    elif method == "dyadic":
        raw = dyadic_levels(s, alpha).max(axis=1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return n ** (alpha - 0.5) * raw / scale


def sample_bm_reference(n: int, alpha: float, seed, paths: int = 1, method: str = "exact"):
    """Scaled Hölder statistic of Gaussian walks with increment variance 1/n.

    Returns a :class:`HolderStat` for ``paths == 1`` and an array otherwise.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((paths, n)) / math.sqrt(n)
    # the walk is already scaled by n^-1/2; the modulus puts back n^alpha
    vals = scaled_statistic_ensemble(x * math.sqrt(n), alpha, method=method)
    if paths == 1:
        return HolderStat(float(vals[0]), alpha, method)
    return vals
