"""Command-line experiment runner.

    holderlab verify [--only 1,5,12]
    holderlab run config.json [--seed S] [--out-dir D] [--paths M] [--threads T]
    holderlab presets

Every CSV starts with ``# config_digest=sha256:<hex>``; the digest covers the
resolved config (overrides applied, output directory excluded), so equal
digests mean equal outputs.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import counterexample as cx
from .dependence import FinitePartitionPair, SizeError as CellError, alpha_exact, marginal_law, rho_exact, \
    tau_estimate_1d
from .deviation import calibrate_shao_K, default_K_grid, fuk_nagaev_check
from .holder import SizeError, sample_bm_reference, scaled_statistic_ensemble
from .processes import PRESETS, CausalLinear, ModelError, long_run_variance, make_preset, sample_ensemble
from .quantile import (
    AbsGaussian,
    BoundedConst,
    DomainError,
    Geometric,
    IntegrabilityError,
    ParetoTail,
    Power,
    Empirical,
    Table,
    condition_report,
)
from .tightness import dyadic_levels_for, level_maxima, tightness_from_maxima

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 2, 3, 4
KINDS = ("conditions", "coefficients", "tightness", "fuk-nagaev", "shao", "counterexample", "holder-clt")
ENV_PREFIX = "HWL_"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    model: str = "iid-gauss"
    seed: int = 0
    paths: int = 2000
    threads: int = 1
    out_dir: str = "out"
    p: float = 3.0
    q: float = 4.0
    sigma_m: float = 1.0
    # conditions
    condition: str = "alpha"
    quantile: dict = field(default_factory=lambda: {"family": "pareto", "scale": 1.0, "index": 4.0})
    sequence: dict = field(default_factory=lambda: {"family": "power", "c": 1.0, "theta": 9.6})
    t_grid: list = field(default_factory=lambda: [10.0, 100.0, 1000.0, 10000.0])
    # coefficients
    joint: list | None = None
    lags: list = field(default_factory=list)
    # tightness / holder-clt
    n: int = 4096
    delta: list = field(default_factory=lambda: [0.05, 0.5])
    eps: list = field(default_factory=lambda: [1.0, 2.0, 4.0])
    alpha: float | None = None
    n_grid: list = field(default_factory=lambda: [1024, 8192])
    # fuk-nagaev / shao
    N: int = 512
    r: float = 8.0
    level_multiples: list = field(default_factory=lambda: [1.0, 1.5, 2.0, 2.5, 3.0, 4.0])
    N_grid: list = field(default_factory=lambda: [64, 128, 256, 512, 1024])
    # counterexample
    levels: list = field(default_factory=lambda: [1, 2])

    def digest(self) -> str:
        body = {k: v for k, v in dataclasses.asdict(self).items() if k != "out_dir"}
        blob = json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
        return "sha256:" + hashlib.sha256(blob).hexdigest()


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INT_FIELDS = {"seed", "paths", "threads", "n", "N"}
_FLOAT_FIELDS = {"p", "q", "sigma_m", "r"}
_LIST_FIELDS = {"t_grid", "lags", "delta", "eps", "n_grid", "level_multiples", "N_grid", "levels"}


def _number(key, v, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    if integer:
        if float(v) != int(v):
            raise ConfigError(f"{key}: expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    return float(v)


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    if "kind" not in raw:
        raise ConfigError("missing key: kind")
    vals = {}
    for key, v in raw.items():
        if key in _INT_FIELDS:
            vals[key] = _number(key, v, integer=True)
        elif key in _FLOAT_FIELDS:
            vals[key] = _number(key, v)
        elif key in _LIST_FIELDS:
            if not isinstance(v, list) or not v:
                raise ConfigError(f"{key}: expected a non-empty list")
            integer = key in {"lags", "n_grid", "N_grid", "levels"}
            vals[key] = [_number(key, x, integer) for x in v]
        elif key == "alpha":
            vals[key] = None if v is None else _number(key, v)
        elif key in ("quantile", "sequence"):
            if not isinstance(v, dict):
                raise ConfigError(f"{key}: expected an object")
            vals[key] = dict(v)
        elif key == "joint":
            if not (isinstance(v, list) and v and all(isinstance(row, list) for row in v)):
                raise ConfigError("joint: expected a matrix (list of rows)")
            vals[key] = [[_number("joint", x) for x in row] for row in v]
        else:
            if not isinstance(v, str):
                raise ConfigError(f"{key}: expected a string")
            vals[key] = v
    cfg = ExperimentConfig(**vals)
    validate(cfg)
    return cfg


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def validate(cfg: ExperimentConfig) -> None:
    _require(cfg.kind in KINDS, f"kind must be one of {', '.join(KINDS)}")
    _require(cfg.paths >= 2, "paths must be >= 2")
    _require(cfg.threads >= 1, "threads must be >= 1")
    _require(cfg.seed >= 0, "seed must be >= 0")
    _require(cfg.p > 2, "p must exceed 2")
    _require(cfg.q >= 2, "q must be >= 2")
    _require(cfg.sigma_m >= 0, "sigma_m must be >= 0")
    _require(all(0 < d <= 1 for d in cfg.delta), "delta must lie in (0, 1]")
    _require(all(e > 0 for e in cfg.eps), "eps must be positive")
    _require(all(t > 0 for t in cfg.t_grid), "t_grid must be positive")
    _require(cfg.n >= 4, "n must be >= 4")
    _require(all(k >= 2 for k in cfg.n_grid), "n_grid entries must be >= 2")
    _require(all(k >= 1 for k in cfg.N_grid) and cfg.N >= 1, "N must be >= 1")
    _require(cfg.r >= 1, "r must be >= 1")
    _require(all(m > 0 for m in cfg.level_multiples), "level_multiples must be positive")
    _require(all(k >= 1 for k in cfg.lags), "lags must be >= 1")
    _require(cfg.alpha is None or 0 < cfg.alpha < 1, "alpha must lie in (0, 1)")
    _require(cfg.condition in ("tau", "alpha", "iid"), "condition must be tau, alpha or iid")
    if cfg.kind in ("tightness", "fuk-nagaev", "shao", "holder-clt") or cfg.lags:
        try:
            make_preset(cfg.model, cfg.sigma_m)
        except ModelError as exc:
            raise ConfigError(str(exc)) from exc
    if cfg.kind == "conditions":
        build_quantile(cfg.quantile)
        if cfg.condition != "iid":
            build_sequence(cfg.sequence)


def build_quantile(spec: dict):
    fam = spec.get("family")
    shapes = {"pareto": {"scale", "index"}, "gauss": {"sigma"}, "bounded": {"c"}, "empirical": {"values"}}
    _require(fam in shapes, f"quantile.family must be one of {', '.join(shapes)}")
    extra = set(spec) - shapes[fam] - {"family"}
    _require(not extra, f"unknown quantile keys: {', '.join(sorted(extra))}")
    try:
        if fam == "pareto":
            return ParetoTail(float(spec.get("scale", 1.0)), float(spec.get("index", 4.0)))
        if fam == "gauss":
            return AbsGaussian(float(spec.get("sigma", 1.0)))
        if fam == "bounded":
            return BoundedConst(float(spec.get("c", 1.0)))
        return Empirical(tuple(float(x) for x in spec["values"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad quantile spec: {exc}") from exc


def build_sequence(spec: dict):
    fam = spec.get("family")
    shapes = {"power": {"c", "theta", "cap"}, "geometric": {"c", "r"}, "table": {"values"}}
    _require(fam in shapes, f"sequence.family must be one of {', '.join(shapes)}")
    extra = set(spec) - shapes[fam] - {"family"}
    _require(not extra, f"unknown sequence keys: {', '.join(sorted(extra))}")
    try:
        if fam == "power":
            return Power(float(spec.get("c", 1.0)), float(spec.get("theta", 1.0)), float(spec.get("cap", 1.0)))
        if fam == "geometric":
            return Geometric(float(spec.get("c", 1.0)), float(spec.get("r", 0.5)))
        return Table(tuple(float(x) for x in spec["values"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad sequence spec: {exc}") from exc


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, digest: str, rows: list[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_digest={digest}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
    return path


# ---------------------------------------------------------------------------
# experiments: each returns {file stem: rows}
# ---------------------------------------------------------------------------


def _bernoulli_quantile(model: CausalLinear):
    G = marginal_law(model)
    return Empirical(tuple(G.atoms - G.mean()))


def run_conditions(cfg):
    Q = build_quantile(cfg.quantile)
    seq = None if cfg.condition == "iid" else build_sequence(cfg.sequence)
    rep = condition_report(cfg.condition, cfg.p, Q, seq, cfg.t_grid)
    col = {"tau": "condition_functional_tau", "alpha": "condition_functional_alpha",
           "iid": "weak_lp_tail_functional"}[cfg.condition]
    rows = [{"t": t, col: v, "verdict_hint": rep.verdict_hint} for t, v in zip(rep.t_grid, rep.values)]
    return {"conditions": rows}


def run_coefficients(cfg):
    out = {}
    if cfg.joint is not None:
        try:
            pair = FinitePartitionPair(np.asarray(cfg.joint, dtype=float))
        except ValueError as exc:
            raise ConfigError(f"joint: {exc}") from exc
        out["coefficients"] = [{"alpha_exact": alpha_exact(pair), "rho_exact": rho_exact(pair)}]
    if cfg.lags:
        model = make_preset(cfg.model, cfg.sigma_m)
        if not isinstance(model, CausalLinear):
            raise ConfigError("lags need a causal linear model (bernoulli-shift)")
        rows = []
        for i in cfg.lags:
            est = tau_estimate_1d(model, i, paths=cfg.paths, seed=[cfg.seed, i])
            rows.append({"lag": i, "tau_estimate_1d": est.value, "std_error": est.std_error,
                         "truncation_depth": est.truncation_depth, "truncated": est.truncated})
        out["tau"] = rows
    if not out:
        raise ConfigError("coefficients needs joint and/or lags")
    return out


def run_tightness(cfg):
    model = make_preset(cfg.model, cfg.sigma_m)
    top = max(dyadic_levels_for(cfg.n, d) for d in cfg.delta)
    if top < 1:
        raise ConfigError("n * delta must be >= 2 for some delta")
    x = sample_ensemble(model, 2**top, cfg.paths, cfg.seed)
    maxima = level_maxima(x, top)
    summary, levels = [], []
    for d in cfg.delta:
        k = dyadic_levels_for(cfg.n, d)
        for e in cfg.eps:
            est = tightness_from_maxima(maxima[:, :k], cfg.n, d, e, cfg.p)
            summary.append({"n": cfg.n, "delta": d, "eps": e, "p": cfg.p,
                            "tightness_sum": est.value, "std_error": est.std_error})
            levels.extend(est.csv_rows())
    return {"tightness": summary, "tightness_levels": levels}


def run_fuk_nagaev(cfg):
    model = make_preset(cfg.model)
    if not isinstance(model, CausalLinear) or model.declared_tau is None:
        raise ConfigError("fuk-nagaev needs a causal linear model with a declared tau")
    Q = _bernoulli_quantile(model)
    f2 = math.sqrt(Q.moment(2))
    lams = [m * math.sqrt(cfg.N) * f2 for m in cfg.level_multiples]
    checks = fuk_nagaev_check(model, Q, model.declared_tau, cfg.N, cfg.r, lams, cfg.paths, cfg.seed)
    rows = []
    for c in checks:
        row = c.row(cfg.model)
        row["fuk_nagaev_bound"] = row.pop("bound")
        rows.append(row)
    return {"fuk_nagaev": rows}


def run_shao(cfg):
    model = make_preset(cfg.model)
    if not hasattr(model, "rho"):
        raise ConfigError("shao needs a model with a declared rho sequence (ar1:phi)")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cal = calibrate_shao_K(model, cfg.q, cfg.N_grid,
                               lambda N: [m * 2.0 * math.sqrt(N) for m in cfg.level_multiples],
                               cfg.paths, cfg.seed, K_grid=default_K_grid())
    if not cal.success:
        raise ArithmeticError("no K on the search grid dominates the empirical tails")
    rows = []
    for c in cal.checks:
        row = c.row(cfg.model)
        row["shao_bound"] = row.pop("bound")
        row["K"] = cal.K
        rows.append(row)
    return {"shao": rows}


def run_counterexample(cfg):
    params = cx.make_tower_params(cfg.p)
    events = []
    for l in cfg.levels:
        if not 1 <= l <= params.l_max:
            raise ConfigError(f"level {l} outside 1..{params.l_max}")
        est = cx.holder_event_probability(params, l, cfg.paths, [cfg.seed, l])
        half = 1.96 * est.std_error
        events.append({"level": l, "N_l": params.N[l - 1], "holder_event_probability": est.probability,
                       "std_error": est.std_error, "ci_low": max(0.0, est.probability - half),
                       "ci_high": min(1.0, est.probability + half), "method": est.method})
    ratios = [{"n": r.n, "lp_ratio": r.estimate, "std_error": r.std_error,
               "coboundary_norm_ratio": r.coboundary_norm_ratio}
              for r in cx.lp_ratio(params, cfg.p, cfg.sigma_m, cfg.n_grid, cfg.paths, cfg.seed)]
    return {"counterexample_events": events, "counterexample_lp_ratio": ratios}


def run_holder_clt(cfg):
    model = make_preset(cfg.model, cfg.sigma_m)
    alpha = cfg.alpha if cfg.alpha is not None else 0.5 - 1.0 / cfg.p
    scale = math.sqrt(long_run_variance(model))
    summary, ecdf = [], []
    for n in cfg.n_grid:
        x = sample_ensemble(model, n, cfg.paths, [cfg.seed, n])
        chunks = np.array_split(x, cfg.threads)
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(lambda c: scaled_statistic_ensemble(c, alpha, scale=scale), chunks))
        vals = np.concatenate(parts)
        ref = sample_bm_reference(n, alpha, [cfg.seed, n, 1], paths=cfg.paths)
        summary.append({"n": n, "alpha": alpha, "median": float(np.median(vals)),
                        "reference_median": float(np.median(ref)),
                        "ks_vs_reference": float(stats.ks_2samp(vals, ref).statistic)})
        srt = np.sort(vals)
        for q in np.linspace(0.0, 1.0, 101)[1:]:
            ecdf.append({"n": n, "x": float(np.quantile(srt, q, method="inverted_cdf")), "y": float(q)})
    return {"holder_clt": summary, "holder_clt_ecdf": ecdf}


RUNNERS = {
    "conditions": run_conditions, "coefficients": run_coefficients, "tightness": run_tightness,
    "fuk-nagaev": run_fuk_nagaev, "shao": run_shao, "counterexample": run_counterexample,
    "holder-clt": run_holder_clt,
}

NUMERIC_ERRORS = (ArithmeticError, cx.BudgetError, cx.InvalidTowerError, SizeError, CellError,
                  IntegrabilityError, DomainError, MemoryError)


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    outputs = RUNNERS[cfg.kind](cfg)
    digest = cfg.digest()
    out_dir = Path(cfg.out_dir)
    return [write_csv(out_dir / f"{stem}.csv", digest, rows) for stem, rows in outputs.items()]


# ---------------------------------------------------------------------------


def _overrides(args) -> dict:
    out = {}
    for key, conv in (("seed", int), ("out_dir", str), ("paths", int), ("threads", int)):
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            try:
                out[key] = conv(env)
            except ValueError as exc:
                raise ConfigError(f"{ENV_PREFIX}{key.upper()}: {exc}") from exc
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
    return out


def _report(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw.update(_overrides(args))
        cfg = parse_config(raw)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        return _report("config", str(exc), EXIT_CONFIG)
    try:
        paths = run_experiment(cfg)
    except ConfigError as exc:
        return _report("config", str(exc), EXIT_CONFIG)
    except NUMERIC_ERRORS as exc:
        return _report("numerical", f"{cfg.kind}: {type(exc).__name__}: {exc}", EXIT_NUMERIC)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_all

    only = None
    if args.only:
        try:
            only = [int(x) for x in args.only.split(",")]
        except ValueError:
            return _report("config", f"bad --only list {args.only!r}", EXIT_CONFIG)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = run_all(only, echo=lambda s: print(s, flush=True))
    failed = [r.key for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def cmd_presets(args) -> int:
    for name, desc in PRESETS.items():
        print(f"{name:<18} {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holderlab", description="Hölder-space CLT experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.set_defaults(func=cmd_verify)
    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--out-dir", dest="out_dir")
    r.add_argument("--paths", type=int)
    r.add_argument("--threads", type=int)
    r.set_defaults(func=cmd_run)
    p = sub.add_parser("presets", help="list model presets")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
