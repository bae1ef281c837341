"""Command-line entry points.

Subcommands:
  size    empirical size study -> CSV + manifest (nonzero exit on gate)
  power   empirical power study -> CSV + manifest
  verify  distributional property probes with PASS/FAIL summary
  test    run all methods on one dataset CSV (y,x1,...,xp)
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from ._rng import substream
from .asymptotic import (
    NullDesignConfig,
    estimate_gamma_moments,
    independence_probe,
    max_stat_sup_distance,
    max_stat_sup_distance_pipeline,
    trimmed_sum_normality_probe,
)
from .calibrate import BootstrapConfig
from .harness import (
    ConfigError,
    ExperimentSpec,
    SizeGateError,
    emit_csv,
    evaluate_methods,
    run_manifest,
    run_power_experiment,
    run_size_experiment,
    spec_field_names,
    write_manifest,
    DESIGNS,
)
from .randgen import CovarianceSpec, factorize
from .reports import Method
from .statcore import residualize

__all__ = ["main"]

_DEFAULT_SEED = 20260814

_SPEC_DEFAULTS = {
    "n_list": (100, 200),
    "p_list": (200, 400, 600),
    "q": 5,
    "design_list": ("i", "ii", "iii"),
    "rho": 0.7,
    "alpha": 0.05,
    "replications": 500,
    "B": 200,
    "s_list": (),
    "signal_norm_sq": 0.8,
    "methods": ("CC", "MAX", "MAX_BOOT", "SUM", "COM"),
    "master_seed": _DEFAULT_SEED,
    "workers": 1,
}


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip() != "")


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip() != "")


def _add_experiment_flags(sub: argparse.ArgumentParser, power: bool) -> None:
    sub.add_argument("--config", type=Path, default=None, help="JSON config file")
    sub.add_argument("--out", type=Path, default=None, help="output CSV path")
    sub.add_argument("--seed", type=int, default=None, help="master seed")
    sub.add_argument("--workers", type=int, default=None, help="worker processes")
    sub.add_argument("--n-list", type=_int_list, default=None, dest="n_list")
    sub.add_argument("--p-list", type=_int_list, default=None, dest="p_list")
    sub.add_argument("--designs", type=_str_list, default=None, dest="design_list")
    sub.add_argument("--q", type=int, default=None)
    sub.add_argument("--rho", type=float, default=None)
    sub.add_argument("--alpha", type=float, default=None)
    sub.add_argument("--replications", type=int, default=None)
    sub.add_argument("--B", type=int, default=None, dest="B")
    sub.add_argument("--methods", type=_str_list, default=None)
    sub.add_argument("--signal-norm-sq", type=float, default=None, dest="signal_norm_sq")
    if power:
        sub.add_argument("--s-list", type=_int_list, default=None, dest="s_list")


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path}: top level must be a JSON object")
    known = set(spec_field_names())
    for key in raw:
        if key not in known:
            raise ConfigError(f"config {path}: unknown field {key!r}")
    return raw


def _build_spec(args: argparse.Namespace, power: bool) -> ExperimentSpec:
    merged = dict(_SPEC_DEFAULTS)
    if power and merged["s_list"] == ():
        merged["s_list"] = (1, 20, 60, 120, 195)
    if not power:
        merged["s_list"] = ()
    merged.update(_load_config(args.config))

    overrides = {
        "n_list": args.n_list,
        "p_list": args.p_list,
        "design_list": args.design_list,
        "q": args.q,
        "rho": args.rho,
        "alpha": args.alpha,
        "replications": args.replications,
        "B": args.B,
        "methods": args.methods,
        "signal_norm_sq": args.signal_norm_sq,
        "master_seed": args.seed,
        "workers": args.workers,
    }
    if power:
        overrides["s_list"] = args.s_list
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value

    try:
        merged["methods"] = tuple(Method(m) for m in merged["methods"])
    except ValueError as exc:
        raise ConfigError(f"methods: {exc}") from exc
    return ExperimentSpec(**merged)


def _run_experiment_command(args: argparse.Namespace, power: bool) -> int:
    spec = _build_spec(args, power)
    out = args.out or Path("results_power.csv" if power else "results_size.csv")
    start = time.perf_counter()
    try:
        rows = run_power_experiment(spec) if power else run_size_experiment(spec)
    except SizeGateError as exc:
        print(f"size gate failed: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start
    emit_csv(rows, out)
    manifest_path = write_manifest(run_manifest(spec, elapsed, out), out)
    print(f"wrote {len(rows)} rows to {out} (manifest: {manifest_path})")
    return 0


def _cmd_size(args: argparse.Namespace) -> int:
    return _run_experiment_command(args, power=False)


def _cmd_power(args: argparse.Namespace) -> int:
    return _run_experiment_command(args, power=True)


_PROBE_NAMES = (
    "max-direct",
    "max-pipeline",
    "trimmed-sum",
    "independence",
    "negative-control",
)


def _cmd_verify(args: argparse.Namespace) -> int:
    probes = _str_list(args.probes) if args.probes != "all" else _PROBE_NAMES
    for name in probes:
        if name not in _PROBE_NAMES:
            print(f"unknown probe {name!r}; choose from {_PROBE_NAMES}", file=sys.stderr)
            return 1
    seed = args.seed
    checks = []  # (name, value, relation, threshold)

    if "max-direct" in probes:
        value = max_stat_sup_distance(
            m=2000, n_reps=args.reps_direct, rng=substream(seed, "verify", "max-direct")
        )
        checks.append(("max-direct", value, "<", 0.05))
    if "max-pipeline" in probes:
        value = max_stat_sup_distance_pipeline(
            n=500,
            p=2000,
            n_reps=args.reps_pipeline,
            rng=substream(seed, "verify", "max-pipeline"),
            q=0,
        )
        checks.append(("max-pipeline", value, "<", 0.07))
    if "trimmed-sum" in probes:
        rng = substream(seed, "verify", "trimmed-sum")
        moments = estimate_gamma_moments(
            factorize(CovarianceSpec.identity(2000)), [0.5], args.moment_reps, rng
        )
        value = trimmed_sum_normality_probe(
            gamma=0.5,
            m=2000,
            n_reps=args.reps_trimmed,
            mu=float(moments.mu[0]),
            sigma_gg=float(moments.sigma[0, 0]),
            rng=substream(seed, "verify", "trimmed-sum", "outer"),
        )
        checks.append(("trimmed-sum", value, "<", 0.05))
    if "independence" in probes or "negative-control" in probes:
        config = NullDesignConfig(
            n=200,
            p=400,
            q=0,
            cov=CovarianceSpec.identity(400),
            dist=DESIGNS["i"],
        )
        if "independence" in probes:
            value = independence_probe(
                config,
                gamma=0.5,
                n_outer=args.outer,
                rng=substream(seed, "verify", "independence"),
                s=1,
            )
            checks.append(("independence", value, "<", 0.04))
        if "negative-control" in probes:
            value = independence_probe(
                config,
                gamma=0.5,
                n_outer=args.outer,
                rng=substream(seed, "verify", "negative-control"),
                s=1,
                y_order=2,
            )
            checks.append(("negative-control", value, ">", 0.10))

    failed = 0
    print(f"{'probe':<18}{'value':>10}  {'threshold':<12}status")
    for name, value, rel, threshold in checks:
        ok = value < threshold if rel == "<" else value > threshold
        failed += not ok
        print(f"{name:<18}{value:>10.4f}  {rel} {threshold:<10.2f}{'PASS' if ok else 'FAIL'}")
    if failed:
        print(f"{failed} probe(s) failed", file=sys.stderr)
        return 1
    return 0


def _read_dataset(path: Path) -> tuple[np.ndarray, np.ndarray]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            header = handle.readline().strip()
            data = np.loadtxt(handle, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"dataset {path}: {exc}") from exc
    columns = header.split(",")
    p = len(columns) - 1
    if p < 1 or columns != ["y"] + [f"x{j}" for j in range(1, p + 1)]:
        raise ConfigError(
            f"dataset {path}: header must be 'y,x1,...,xp', got {header!r}"
        )
    if data.shape[1] != p + 1:
        raise ConfigError(
            f"dataset {path}: {data.shape[1]} data columns for {p + 1} header fields"
        )
    return data[:, 0], data[:, 1:]


def _cmd_test(args: argparse.Namespace) -> int:
    y, x = _read_dataset(args.data)
    n, p = x.shape
    q = args.q
    if not 0 <= q < p:
        print(f"--q must lie in [0, p = {p})", file=sys.stderr)
        return 1
    if n <= q:
        print(f"dataset has n = {n} rows; need n > q = {q}", file=sys.stderr)
        return 1
    rd = residualize(x[:, :q], x[:, q:])
    config = BootstrapConfig(B=args.B)
    reports = evaluate_methods(
        rd,
        y,
        x[:, :q],
        tuple(Method),
        args.alpha,
        config,
        substream(args.seed, "cli-test"),
    )
    print(f"n={n} p={p} q={q} m={rd.m} alpha={args.alpha} B={args.B}")
    print(f"{'method':<10}{'statistic':>14}{'p_value':>12}  decision")
    for method in Method:
        r = reports[method]
        verdict = "reject" if r.reject else "retain"
        print(f"{method.value:<10}{r.statistic:>14.6f}{r.p_value:>12.6f}  {verdict}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lstatk",
        description="Adaptive top-k score tests: studies, probes, and single-shot testing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_size = sub.add_parser("size", help="empirical size study")
    _add_experiment_flags(p_size, power=False)
    p_size.set_defaults(func=_cmd_size)

    p_power = sub.add_parser("power", help="empirical power study")
    _add_experiment_flags(p_power, power=True)
    p_power.set_defaults(func=_cmd_power)

    p_verify = sub.add_parser("verify", help="distributional property probes")
    p_verify.add_argument("--probes", default="all", help="comma list or 'all'")
    p_verify.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    p_verify.add_argument("--reps-direct", type=int, default=5000, dest="reps_direct")
    p_verify.add_argument("--reps-pipeline", type=int, default=2000, dest="reps_pipeline")
    p_verify.add_argument("--reps-trimmed", type=int, default=5000, dest="reps_trimmed")
    p_verify.add_argument("--moment-reps", type=int, default=100_000, dest="moment_reps")
    p_verify.add_argument("--outer", type=int, default=2000)
    p_verify.set_defaults(func=_cmd_verify)

    p_test = sub.add_parser("test", help="run all methods on one dataset CSV")
    p_test.add_argument("--data", type=Path, required=True, help="CSV with header y,x1,...,xp")
    p_test.add_argument("--q", type=int, required=True, help="leading nuisance column count")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--B", type=int, default=500)
    p_test.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    p_test.set_defaults(func=_cmd_test)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
