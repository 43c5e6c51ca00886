"""Monte Carlo evaluation of the dyadic Hölder tightness sum

    n * sum_{k=1}^{log2 floor(n delta)} 2^-k P{ max_{i <= 2^k} |S_i| > eps 2^(k alpha) n^(1/p) },
    alpha = 1/2 - 1/p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .processes import sample_ensemble


@dataclass
class TightnessEstimate:
    n: int
    delta: float
    eps: float
    p: float
    alpha: float
    value: float
    per_level: list = field(default_factory=list)  # (k, empirical_prob, contribution)
    paths: int = 0
    std_error: float = 0.0
    empty: bool = False

    def csv_rows(self):
        for k, prob, contrib in self.per_level:
            yield {
                "n": self.n, "delta": self.delta, "eps": self.eps, "p": self.p,
                "k": k, "empirical_prob": prob, "contribution": contrib,
            }


def dyadic_levels_for(n: int, delta: float) -> int:
    m = int(math.floor(n * delta))
    return int(math.floor(math.log2(m))) if m >= 1 else 0


def level_maxima(paths: np.ndarray, top: int) -> np.ndarray:
    """(M, top) array: max_{i <= 2^k} |S_i| for k = 1..top."""
    s = np.abs(np.cumsum(paths[:, : 2**top], axis=1))
    run = np.maximum.accumulate(s, axis=1)
    return run[:, [2**k - 1 for k in range(1, top + 1)]]


def tightness_from_maxima(maxima: np.ndarray, n, delta, eps, p) -> TightnessEstimate:
    alpha = 0.5 - 1.0 / p
    top = maxima.shape[1]
    m = maxima.shape[0]
    per_level, var = [], 0.0
    for k in range(1, top + 1):
        thr = eps * 2.0 ** (k * alpha) * n ** (1.0 / p)
        prob = float(np.mean(maxima[:, k - 1] > thr))  # strict, ties count as not exceeded
        per_level.append((k, prob, 2.0**-k * prob))
        var += (n * 2.0**-k) ** 2 * prob * (1 - prob) / m
    value = n * sum(c for _, _, c in per_level)
    return TightnessEstimate(n, delta, eps, p, alpha, value, per_level, m, math.sqrt(var))


def tightness_sum(model, n: int, delta: float, eps: float, p: float, paths: int, seed,
                  maxima: np.ndarray | None = None) -> TightnessEstimate:
    """One path per replicate; every level is read off the same path prefix.

    Pass precomputed ``maxima`` (from :func:`level_maxima`) to reuse paths
    across (delta, eps) settings.
    """
    if n < 4 or not (0 < delta <= 1) or eps <= 0 or p <= 2 or paths < 1:
        raise ValueError("need n >= 4, delta in (0, 1], eps > 0, p > 2, paths >= 1")
    top = dyadic_levels_for(n, delta)
    alpha = 0.5 - 1.0 / p
    if int(math.floor(n * delta)) < 2:
        return TightnessEstimate(n, delta, eps, p, alpha, 0.0, [], paths, 0.0, empty=True)
    if maxima is None:
        x = sample_ensemble(model, 2**top, paths, seed)
        maxima = level_maxima(x, top)
    return tightness_from_maxima(maxima[:, :top], n, delta, eps, p)

