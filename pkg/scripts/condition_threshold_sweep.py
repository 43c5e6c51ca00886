"""Sweep the alpha-mixing condition functional across the critical decay rate.

For Q = Pareto(1, a) and alpha(k) = k^-theta the functional behaves like
t^(p - 1 - (1 - 1/a) / (1/theta + 1/a)) in t; it vanishes iff theta exceeds
a(p-1)/(a-p). Prints the end-to-end drop over t in 1e1..1e4 and the
predicted exponent for a grid of theta multiples.
"""
import argparse

from holderlab.quantile import ParetoTail, Power, condition_functional_alpha


def sweep(a: float, p: float, multiples):
    Q = ParetoTail(1.0, a)
    crit = a * (p - 1) / (a - p)
    ts = [10.0**k for k in range(1, 5)]
    print(f"critical theta = {crit:.4g}")
    print("multiple  theta    drop(1e1->1e4)  predicted exponent")
    for m in multiples:
        theta = m * crit
        vals = [condition_functional_alpha(p, Q, Power(1.0, theta), t) for t in ts]
        expo = p - 1 - (1 - 1 / a) / (1 / theta + 1 / a)
        print(f"{m:8.2f}  {theta:7.3f}  {vals[0] / vals[-1]:14.4g}  {expo:+.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, default=4.0)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--multiples", type=float, nargs="+", default=[0.8, 1.0, 1.2, 2.0, 4.0, 10.0])
    args = ap.parse_args()
    sweep(args.a, args.p, args.multiples)
