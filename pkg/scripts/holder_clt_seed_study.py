"""KS distances between scaled Hölder statistics across n, repeated over seeds.

Shows the seed-to-seed spread of the two-sample KS statistic at M paths,
which sets how tight a fixed KS tolerance can be.
"""
import argparse
import math

import numpy as np
from scipy import stats

from holderlab.holder import sample_bm_reference, scaled_statistic_ensemble
from holderlab.processes import IidModel, sample_ensemble
from holderlab.quantile import ParetoTail


def study(a: float, p: float, n_small: int, n_large: int, paths: int, seeds: int):
    alpha = 0.5 - 1 / p
    model = IidModel(ParetoTail(1.0, a))
    scale = math.sqrt(a / (a - 2))
    rows = []
    for s in range(seeds):
        x = scaled_statistic_ensemble(sample_ensemble(model, n_small, paths, [s, 0]), alpha, scale=scale)
        y = scaled_statistic_ensemble(sample_ensemble(model, n_large, paths, [s, 1]), alpha, scale=scale)
        r = sample_bm_reference(n_large, alpha, [s, 2], paths=paths)
        rows.append((stats.ks_2samp(x, y).statistic, stats.ks_2samp(y, r).statistic))
        print(f"seed {s}: KS(n_small, n_large) = {rows[-1][0]:.4f}  KS(n_large, ref) = {rows[-1][1]:.4f}",
              flush=True)
    arr = np.array(rows)
    print(f"mean {arr.mean(axis=0)}, max {arr.max(axis=0)}")
    print(f"5% two-sample critical value: {1.358 * math.sqrt(2 / paths):.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, default=4.0)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--n-small", type=int, default=2**10)
    ap.add_argument("--n-large", type=int, default=2**13)
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--seeds", type=int, default=5)
    a = ap.parse_args()
    study(a.a, a.p, a.n_small, a.n_large, a.paths, a.seeds)
