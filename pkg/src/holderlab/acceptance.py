"""Acceptance suite: one function per criterion, each returning CriterionResult(s).

Run through ``python3 -m holderlab verify`` or ``pytest tests/test_acceptance.py -s``.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import counterexample as cx
from .dependence import (
    FinitePartitionPair,
    alpha_exact,
    marginal_law,
    rho_exact,
    tau_alpha_bound_check,
    tau_estimate_1d,
)
from .deviation import calibrate_shao_K, fuk_nagaev_check
from .holder import PartialSumPath, holder_stat_dyadic, holder_stat_exact, dyadic_constant, \
    sample_bm_reference, scaled_statistic_ensemble
from .processes import CounterexampleModel, GaussianAR1, IidModel, bernoulli_shift, sample_ensemble
from .quantile import (
    AbsGaussian,
    BoundedConst,
    Empirical,
    Geometric,
    ParetoTail,
    Power,
    alpha_profile,
    condition_functional_alpha,
    condition_functional_tau,
    raw_functional_quadrature,
    tau_profile,
    weak_lp_tail_functional,
)
from .tightness import level_maxima, tightness_sum, tightness_from_maxima

BASE_SEED = 20_240


@dataclass
class CriterionResult:
    key: str
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.key:<4} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(key: str, name: str, fn: Callable[[], tuple[bool, str]], budget: float) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if dt > budget:
        detail += f"; over runtime budget {budget:g}s"
        ok = False
    return CriterionResult(key, name, bool(ok), detail, dt)


# ---------------------------------------------------------------------------


def _random_config(rng):
    kind = ("tau", "alpha")[rng.integers(2)]
    pick = rng.integers(3)
    if pick == 0:
        Q = ParetoTail(float(rng.uniform(0.5, 3.0)), float(rng.uniform(1.5, 6.0)))
    elif pick == 1:
        Q = AbsGaussian(float(rng.uniform(0.3, 3.0)))
    else:
        Q = BoundedConst(float(rng.uniform(0.3, 3.0)))
    if rng.integers(2):
        seq = Power(float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.5, 8.0)))
    else:
        seq = Geometric(float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.1, 0.9)))
    p = float(rng.uniform(2.1, 6.0))
    t = float(10 ** rng.uniform(-0.5, 2.5))
    return kind, Q, seq, p, t


def criterion_1():
    def run():
        rng = np.random.default_rng(BASE_SEED + 1)
        worst, bad = 0.0, 0
        for _ in range(100):
            kind, Q, seq, p, t = _random_config(rng)
            if kind == "tau":
                fast = condition_functional_tau(p, Q, seq, t)
                oracle = raw_functional_quadrature(p, Q, tau_profile(Q, seq), t)
            else:
                fast = condition_functional_alpha(p, Q, seq, t)
                oracle = raw_functional_quadrature(p, Q, alpha_profile(Q, seq), t)
            err = abs(fast - oracle) / max(abs(oracle), 1e-300) if (fast or oracle) else 0.0
            worst = max(worst, err)
            bad += err > 1e-6
        return bad == 0, f"100 configs, max rel err {worst:.2e}, {bad} over 1e-6"

    return _timed("1", "condition functional vs quadrature", run, 10.0)


def criterion_2():
    def run():
        worst = 0.0
        Q = ParetoTail(1.0, 3.0)
        for t in (1.0, 4.0, 16.0, 64.0):
            got = weak_lp_tail_functional(2.5, Q, t)
            worst = max(worst, abs(got / (1.5 * t**-0.5) - 1))
        p = 3.0
        Qp = ParetoTail(1.0, p)
        for t in (1.0, 4.0, 16.0, 64.0):
            got = weak_lp_tail_functional(p, Qp, t)
            worst = max(worst, abs(got / (p / (p - 1)) - 1))
        return worst <= 1e-8, f"max rel err {worst:.2e}"

    return _timed("2", "weak-Lp closed forms", run, 10.0)


def criterion_3():
    def run():
        Q, p, a = ParetoTail(1.0, 4.0), 3.0, 4.0
        base = a * (p - 1) / (a - p)
        ts = (1e1, 1e2, 1e3, 1e4)
        hi = [condition_functional_alpha(p, Q, Power(1.0, 1.2 * base), t) for t in ts]
        lo = [condition_functional_alpha(p, Q, Power(1.0, 0.8 * base), t) for t in ts]
        drop_hi, drop_lo = hi[0] / hi[-1], lo[0] / lo[-1]
        ok = drop_hi >= 10 and drop_lo < 2
        return ok, f"drop at 1.2x threshold {drop_hi:.2f} (need >= 10), at 0.8x {drop_lo:.3f} (need < 2)"

    return _timed("3", "threshold behaviour of the alpha condition", run, 30.0)


def criterion_4():
    def run():
        rng = np.random.default_rng(BASE_SEED + 4)
        worst = -math.inf
        for _ in range(100):
            r, c = rng.integers(2, 7, size=2)
            joint = rng.dirichlet(np.full(r * c, 0.5)).reshape(r, c)
            joint /= joint.sum()
            pair = FinitePartitionPair(joint)
            worst = max(worst, 4 * alpha_exact(pair) - rho_exact(pair))
        diag = FinitePartitionPair(np.diag([0.5, 0.5]))
        a, r = alpha_exact(diag), rho_exact(diag)
        ok = worst <= 1e-12 and a == 0.25 and abs(r - 1.0) <= 1e-15
        return ok, f"max(4 alpha - rho) = {worst:.3e}; diag gives ({a}, {r})"

    return _timed("4", "4 alpha <= rho on finite joints", run, 5.0)


def criterion_5():
    def run():
        model = bernoulli_shift()
        G = marginal_law(model)
        Q = Empirical(tuple(G.atoms - G.mean()))
        rhs = 2.0 * Q.integrated(0.5)
        rows, ok = [], True
        for i in range(1, 7):
            est = tau_estimate_1d(model, i, paths=10_000, seed=BASE_SEED + 50 + i)
            ok &= tau_alpha_bound_check(est.value, 0.25, Q, margin=3 * est.std_error)
            rows.append(f"{est.value:.4f}")
        return ok, f"tau(1..6) = {', '.join(rows)} vs 2 int_0^1/2 Q = {rhs:.4f}"

    return _timed("5", "tau <= 2 int_0^{2 alpha} Q on the Bernoulli shift", run, 60.0)


def criterion_6():
    def run():
        model = bernoulli_shift()
        G = marginal_law(model)
        Q = Empirical(tuple(G.atoms - G.mean()))
        N = 512
        f2 = math.sqrt(Q.moment(2))
        lams = np.geomspace(0.1, 5.0, 8) * math.sqrt(N) * f2
        checks = fuk_nagaev_check(model, Q, model.declared_tau, N, 8.0, lams, 10_000, BASE_SEED + 6)
        bad = [c for c in checks if not c.dominated]
        slack = min(c.bound - c.empirical - 3 * c.std_error for c in checks)
        return not bad, f"{len(checks) - len(bad)}/{len(checks)} dominated, min slack {slack:.3g}"

    return _timed("6", "Fuk-Nagaev domination", run, 60.0)


def shao_x_grid(N: int) -> list[float]:
    return [c * 2.0 * math.sqrt(N) for c in (1.0, 1.5, 2.0, 2.5, 3.0, 4.0)]


def criterion_7():
    def run():
        model = GaussianAR1(0.5)
        Ns = [2**k for k in range(6, 11)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cal = calibrate_shao_K(model, 4.0, Ns, shao_x_grid, 10_000, BASE_SEED + 7)
        if not cal.success:
            return False, "no K on the grid dominates"
        ok = all(c.dominated for c in cal.checks)
        return ok, f"K = {cal.K:.4g} (grid index {cal.grid_index}), {len(cal.checks)} points dominated"

    return _timed("7", "Shao domination after calibration", run, 120.0)


def criterion_8():
    def run():
        alpha, M = 1.0 / 6.0, 2000
        model = IidModel(ParetoTail(1.0, 4.0), name="iid-pareto:4")
        scale = math.sqrt(2.0)
        ens, refs = {}, {}
        for n in (2**10, 2**13):
            x = sample_ensemble(model, n, M, BASE_SEED + 80 + n.bit_length())
            ens[n] = scaled_statistic_ensemble(x, alpha, scale=scale)
            refs[n] = sample_bm_reference(n, alpha, BASE_SEED + 90 + n.bit_length(), paths=M)
        d_n = stats.ks_2samp(ens[2**10], ens[2**13]).statistic
        d_ref = max(stats.ks_2samp(ens[n], refs[n]).statistic for n in ens)
        ok = d_n <= 0.05 and d_ref <= 0.05
        return ok, f"KS(2^10, 2^13) = {d_n:.4f}, max KS vs Gaussian reference = {d_ref:.4f}"

    return _timed("8", "Holder CLT stabilization for a = 4, p = 3", run, 120.0)


def criterion_9(threshold_factor: float = 4.0, seed_offset: int = 0):
    def run():
        alpha, M = 1.0 / 6.0, 2000
        model = IidModel(ParetoTail(1.0, 3.0), name="iid-pareto:3")
        scale = math.sqrt(3.0)
        ref = sample_bm_reference(2**10, alpha, BASE_SEED + 99 + seed_offset, paths=M)
        thr = threshold_factor * float(np.median(ref))
        rates = []
        for k in (10, 12, 14):
            x = sample_ensemble(model, 2**k, M, BASE_SEED + 900 + k + seed_offset)
            rates.append(float(np.mean(scaled_statistic_ensemble(x, alpha, scale=scale) > thr)))
        ok = all(r >= 0.05 for r in rates)
        shown = ", ".join(f"{r:.4f}" for r in rates)
        return ok, f"exceedance of {thr:.3f} at n = 2^10, 2^12, 2^14: {shown} (need >= 0.05)"

    return _timed("9", "no Holder CLT at a = p = 3", run, 120.0)


def criterion_10():
    def run():
        model = IidModel(AbsGaussian(1.0), name="iid-gauss")
        n, p, M = 2**12, 3.0, 10_000
        x = sample_ensemble(model, n // 2, M, BASE_SEED + 10)
        maxima = level_maxima(x, int(math.log2(n // 2)))
        v = {}
        for eps in (4.0, 8.0):
            for delta in (0.05, 0.5):
                v[eps, delta] = tightness_sum(model, n, delta, eps, p, M, None, maxima=maxima).value
        ok = all(v[e, 0.05] <= v[e, 0.5] for e in (4.0, 8.0))
        ok &= all(v[8.0, d] <= v[4.0, d] for d in (0.05, 0.5))
        shown = ", ".join(f"eps={e:g} delta={d:g}: {val:.3g}" for (e, d), val in v.items())
        if not any(v.values()):
            shown += " (all zero, orderings hold only with equality)"
        return ok, shown

    return _timed("10", "tightness sum ordering (common random numbers)", run, 60.0)


def criterion_11():
    def run():
        p = 3.0
        mini = cx.tower_from(p, [6], [4], validate=False)
        N, K = mini.N[0], mini.K[0]
        alpha = 0.5 - 1.0 / p
        notes = []

        # tower partition: T^i A for i < N, A = {first 6 bits zero}
        bits, seen = [0] * 6, []
        for _ in range(N):
            seen.append(sum(b << k for k, b in enumerate(bits)))
            bits = odometer = cx.odometer_step(bits)
        part_ok = sorted(seen) == list(range(N)) and sum(odometer) == 0
        notes.append(f"partition {'ok' if part_ok else 'broken'}")

        # pointwise lower bound on the rungs k <= N - K
        vals = np.array([cx.g_level_value(mini, 1, m) for m in range(N)])
        lower_ok, hit = True, 0
        for k in range(N):
            path = vals[(k + np.arange(1, N + 1)) % N]
            stat = holder_stat_exact(PartialSumPath(np.concatenate(([0.0], path))), alpha).value
            ratio = max(abs(path[j] - path[i]) / (j - i) ** alpha for i in range(N) for j in range(i + 1, N))
            if not math.isclose(stat, ratio, rel_tol=1e-12):
                lower_ok = False
            if k <= N - K:
                hit += 1
                lower_ok &= ratio >= N ** (1 / p) * (1 - 1e-12)
        lower_ok &= hit / N == (N - K + 1) / N
        notes.append(f"pointwise bound {'ok' if lower_ok else 'broken'} on {hit}/{N} rungs")

        # telescoping over every state
        states = [cx.OdometerState(J, cx.state_bits(mini)) for J in range(N)]
        offs = cx.level_offsets(mini, states)
        g = cx.g_matrix(mini, offs, np.arange(1, 2 * N + 2))
        tele = np.abs(np.cumsum(g[:, :-1] - g[:, 1:], axis=1) - (g[:, :1] - g[:, 1:])).max()
        direct = np.array([[cx.eval_g(mini, s, i).value for i in (1, 5)] for s in states])
        tele_ok = tele <= 1e-9 and np.array_equal(direct, g[:, [0, 4]])
        notes.append(f"telescoping err {tele:.1e}")

        # single-level Lp displays
        c = 2.0 ** (1 / p)
        lp1 = cx.exact_level_lp_norm(mini, 1, 1, p)
        lp_ok = math.isclose(lp1, c / math.sqrt(K), rel_tol=1e-12)
        lp_ok &= all(cx.exact_level_lp_norm(mini, 1, n, p) <= c * n / math.sqrt(K) * (1 + 1e-12) for n in (1, 2, 3))
        notes.append(f"||g - g o T||_p = {lp1:.6f}")
        return part_ok and lower_ok and tele_ok and lp_ok, "; ".join(notes)

    return _timed("11", "counterexample exact layer (mini-tower)", run, 5.0)


LP_GRID = (2**6, 2**10, 2**14, 2**18, 2**22)


def criterion_12():
    params = cx.make_tower_params(3.0)
    out = []

    def event():
        est = cx.holder_event_probability(params, 2, 2000, BASE_SEED + 121)
        ok = est.probability >= 1 / 8 - 3 * est.std_error
        return ok, f"P(event at l = 2) = {est.probability:.4f} +- {est.std_error:.4f} ({est.method})"

    def ratios(sigma_m):
        def run():
            rs = cx.lp_ratio(params, params.p, sigma_m, LP_GRID, 10_000, BASE_SEED + 122 + int(sigma_m))
            v = [r.estimate for r in rs]
            spread = max(v) / min(v) if min(v) > 0 else math.inf
            return spread <= 3, f"ratios {', '.join(f'{x:.3g}' for x in v)}; max/min = {spread:.3g}"

        return run

    def tight():
        n, delta, eps, M = params.N[1], 2.0**-10, 0.5, 4000
        ce = tightness_sum(CounterexampleModel(params, 1.0), n, delta, eps, params.p, M, BASE_SEED + 124)
        gauss = tightness_sum(IidModel(AbsGaussian(1.0)), n, delta, eps, params.p, M, BASE_SEED + 125)
        ok = ce.value > 10 * gauss.value
        return ok, f"counterexample {ce.value:.3g} +- {ce.std_error:.2g}, iid Gaussian {gauss.value:.3g}"

    out.append(_timed("12a", "counterexample event probability", event, 150.0))
    out.append(_timed("12b", "Lp ratio bounded, sigma_m = 0", ratios(0.0), 60.0))
    out.append(_timed("12c", "Lp ratio bounded, sigma_m = 1", ratios(1.0), 60.0))
    out.append(_timed("12d", "counterexample tightness sum vs Gaussian", tight, 60.0))
    return out


def criterion_13():
    def run():
        rng = np.random.default_rng(BASE_SEED + 13)
        viol = 0
        n = 1024
        for k in range(200):
            kind = k % 3
            if kind == 0:
                x = rng.standard_normal(n)
            elif kind == 1:
                x = rng.standard_t(3, n)
            else:
                x = rng.pareto(2.5, n) * rng.choice([-1.0, 1.0], n)
            S = PartialSumPath.from_increments(x)
            for alpha in (1 / 6, 1 / 4, 1 / 3):
                d = holder_stat_dyadic(S, alpha).value
                e = holder_stat_exact(S, alpha).value
                viol += not (d <= e * (1 + 1e-12) and e <= dyadic_constant(alpha) * d * (1 + 1e-12))
        return viol == 0, f"600 (path, alpha) pairs, {viol} violations"

    return _timed("13", "dyadic Holder bracket", run, 30.0)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11, 12: criterion_12, 13: criterion_13,
}


def run_criterion(number: int) -> list[CriterionResult]:
    res = CRITERIA[number]()
    return res if isinstance(res, list) else [res]


def run_all(numbers=None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for k in numbers or sorted(CRITERIA):
        for r in run_criterion(k):
            if echo:
                echo(r.line())
            out.append(r)
    return out
