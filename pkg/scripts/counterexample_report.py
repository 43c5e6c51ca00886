"""Non-tightness signature of the odometer counterexample.

Prints the tower parameters and certificates, the Hölder event probability
per level, the L^p ratios with and without the martingale part, and the
tightness sum against an iid Gaussian at the same (n, eps, delta).
"""
import argparse

from holderlab import counterexample as cx
from holderlab.processes import CounterexampleModel, IidModel
from holderlab.quantile import AbsGaussian
from holderlab.tightness import tightness_sum


def report(p: float, paths: int, seed: int):
    params = cx.make_tower_params(p)
    print(f"b = {params.b}, K = {params.K}")
    for k, v in params.certificates.items():
        print(f"  {k}: {v}")
    for l in (1, 2):
        est = cx.holder_event_probability(params, l, paths, [seed, l])
        print(f"event probability l={l}: {est.probability:.4f} +- {est.std_error:.4f} ({est.method})")
    grid = [2**k for k in (6, 10, 14, 18, 22)]
    for sigma in (0.0, 1.0):
        rs = cx.lp_ratio(params, p, sigma, grid, paths, seed)
        print(f"lp ratio sigma_m={sigma:g}: " + ", ".join(f"{r.estimate:.3g}" for r in rs))
    n = params.N[1]
    ce = tightness_sum(CounterexampleModel(params, 1.0), n, 2.0**-10, 0.5, p, paths, seed)
    ga = tightness_sum(IidModel(AbsGaussian(1.0)), n, 2.0**-10, 0.5, p, paths, seed + 1)
    print(f"tightness sum at n = {n}: counterexample {ce.value:.3g} +- {ce.std_error:.2g}, "
          f"iid Gaussian {ga.value:.3g}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    report(a.p, a.paths, a.seed)
