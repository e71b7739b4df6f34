"""Command-line interface: ``composite-silhouette {select,ablation,convergence,runtime,synth}``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import baselines as _baselines
from .composite import CompositeConfig, WeightTransform
from .data import DataError, DataMatrix, generate_synthetic, load_csv, parse_synthetic_id, standardize, write_csv
from .experiments import (DEFAULT_B_GRID, convergence_study, convergence_summary, runtime_benchmark, svg_line_chart,
                          write_convergence_csv, write_runtime_csv, write_table)
from .selection import build_report, collect_sweep, compute_baselines, parse_candidates, report_to_dict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

ABLATION_TRANSFORMS = ("tanh", "linear", "sigmoid(1)", "step")


class ConfigError(Exception):
    pass


class NumericError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers

def _int_list(text):
    try:
        out = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return out


def _add_data_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="numeric CSV file")
    src.add_argument("--synth", metavar="ID", help="synthetic benchmark: S1..S4, optionally with -small")
    p.add_argument("--header", action="store_true", help="the input CSV has a header row")
    p.add_argument("--label-column", metavar="NAME", help="header column holding ground-truth labels (dropped from features)")
    p.add_argument("--standardize", action="store_true", help="z-score every feature column first")
    p.add_argument("--data-seed", type=int, default=None, help="seed for synthetic data (defaults to --seed)")


def _add_composite_args(p, k_default="2..10"):
    p.add_argument("--k", default=k_default, help="candidates, MIN..MAX or a comma list (default %(default)s)")
    p.add_argument("--B", type=int, default=25, help="subsamples per candidate (default %(default)s)")
    p.add_argument("--m", type=int, default=None, help="subsample size (default: automatic)")
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--norm", choices=("pooled", "split"), default="pooled")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $COMPOSITE_SIL_THREADS or the CPU count)")
    p.add_argument("--out", default=".", metavar="DIR", help="output directory (default: current)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="composite-silhouette",
                                     description="Choose the number of clusters with the Composite Silhouette.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="sweep candidate k and report the selection")
    _add_data_args(p)
    _add_composite_args(p)
    p.add_argument("--transform", default="tanh", help="tanh, linear, sigmoid, sigmoid(ALPHA) or step")
    p.add_argument("--alpha", type=float, default=1.0, help="sigmoid steepness")
    p.add_argument("--rule", choices=("argmax", "lcb"), default="argmax", help="rule printed first")
    p.add_argument("--lcb-c", type=float, default=1.0)
    p.add_argument("--baselines", default="", help="comma list from: " + ",".join(_baselines.BASELINE_NAMES))
    p.add_argument("--baseline-repeats", type=int, default=None, help="full-data runs per k (default: B)")

    p = sub.add_parser("ablation", help="compare weight transforms on shared subsamples")
    _add_data_args(p)
    _add_composite_args(p)
    p.add_argument("--transforms", default=",".join(ABLATION_TRANSFORMS))
    p.add_argument("--lcb-c", type=float, default=1.0)

    p = sub.add_parser("convergence", help="error of the composite versus the number of subsamples")
    _add_data_args(p)
    _add_composite_args(p, k_default="5")
    p.add_argument("--B-max", type=int, default=200)
    p.add_argument("--grid", default=None, help="comma list of B values (default 10,20,...,200)")
    p.add_argument("--reps", type=int, default=25)
    p.add_argument("--transform", default="tanh")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--plot", action="store_true", help="also write convergence.svg")

    p = sub.add_parser("runtime", help="runtime scaling of the composite versus full-data Silhouette")
    p.add_argument("--n", type=_int_list, default=[1000, 10_000], help="comma list of dataset sizes")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--B", type=int, default=20)
    p.add_argument("--cap", type=int, default=2000, help="subsample size cap; 0 disables it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", metavar="DIR")
    p.add_argument("--plot", action="store_true", help="also write runtime.svg")

    p = sub.add_parser("synth", help="write a synthetic benchmark to CSV")
    p.add_argument("spec", help="S1..S4, optionally with -small")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH", help="CSV file to write")
    return parser


def resolve_threads(value) -> int:
    if value is None:
        env = os.environ.get("COMPOSITE_SIL_THREADS")
        if env:
            try:
                value = int(env)
            except ValueError:
                raise ConfigError(f"COMPOSITE_SIL_THREADS must be an integer, got {env!r}") from None
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise ConfigError(f"thread count must be >= 1, got {value}")
    return value


def load_data(args) -> DataMatrix:
    if args.input:
        if args.label_column and not args.header:
            raise ConfigError("--label-column requires --header")
        data = load_csv(args.input, has_header=args.header, label_column=args.label_column)
    else:
        try:
            spec = parse_synthetic_id(args.synth, seed=args.seed if args.data_seed is None else args.data_seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        data = generate_synthetic(spec)
    return standardize(data) if args.standardize else data


def _transform(text, alpha) -> WeightTransform:
    try:
        return WeightTransform.parse(text, alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _config(args, transform) -> CompositeConfig:
    try:
        return CompositeConfig(B=args.B, m=args.m, transform=transform, epsilon=args.epsilon,
                               normalization_mode=args.norm, workers=resolve_threads(args.threads))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _candidates(text):
    try:
        return parse_candidates(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _check_finite(report):
    for k, r in report.per_k.items():
        if not all(math.isfinite(v) for v in (r.s_mm, r.mean_micro, r.mean_macro, r.std_composite)):
            raise NumericError(f"non-finite composite score at k={k}")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_select(args) -> int:
    ks = _candidates(args.k)
    cfg = _config(args, _transform(args.transform, args.alpha))
    names = [b.strip() for b in args.baselines.split(",") if b.strip()]
    bad = [b for b in names if b not in _baselines.BASELINE_NAMES]
    if bad:
        raise ConfigError(f"unknown baseline(s) {', '.join(bad)}; expected {', '.join(_baselines.BASELINE_NAMES)}")
    data = load_data(args)
    try:
        m, raw = collect_sweep(data, ks, cfg, args.seed)
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise ConfigError(str(exc)) from None
    base = compute_baselines(data, ks, names, args.baseline_repeats or cfg.B, args.seed, cfg.clusterer)
    report = build_report(raw, cfg, m, args.lcb_c, base)
    _check_finite(report)

    out = _out_dir(args.out)
    config = {
        "command": "select",
        "input": args.input,
        "synth": args.synth,
        "seed": args.seed,
        "k": list(ks),
        "B": cfg.B,
        "m": m,
        "transform": cfg.transform.name,
        "epsilon": cfg.epsilon,
        "norm": cfg.normalization_mode,
        "rule": args.rule,
        "lcb_c": args.lcb_c,
        "baselines": names,
    }
    doc = report_to_dict(report, config)
    (out / "report.json").write_text(json.dumps(doc, indent=2, allow_nan=True) + "\n")

    base_names = list(report.baselines)
    header = ["k", "s_mm", "mean_micro", "mean_macro", "std_composite"] + base_names
    rows = []
    for k in report.ks:
        r = report.per_k[k]
        rows.append([k, r.s_mm, r.mean_micro, r.mean_macro, r.std_composite]
                    + [report.baselines[b].per_k[k] for b in base_names])
    write_table(out / "scores.csv", header, rows)

    order = [args.rule] + [r for r in report.selected if r != args.rule]
    for rule in order:
        print(f"{rule}: {report.selected[rule]}")
    return EXIT_OK


def cmd_ablation(args) -> int:
    ks = _candidates(args.k)
    transforms = [_transform(t.strip(), 1.0) for t in _split_transforms(args.transforms)]
    if not transforms:
        raise ConfigError("no transforms given")
    cfg = _config(args, transforms[0])
    data = load_data(args)
    try:
        m, raw = collect_sweep(data, ks, cfg, args.seed)
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise ConfigError(str(exc)) from None

    header = ["transform", "argmax", "lcb"] + [f"s_mm_k{k}" for k in ks]
    rows = []
    for t in transforms:
        report = build_report(raw, replace(cfg, transform=t), m, args.lcb_c)
        _check_finite(report)
        rows.append([t.name, report.selected["argmax"], report.selected["lcb"]] + [report.per_k[k].s_mm for k in ks])
        print(f"{t.name}: {report.selected['argmax']}")
    write_table(_out_dir(args.out) / "ablation.csv", header, rows)
    return EXIT_OK


def _split_transforms(text):
    # commas inside "sigmoid(1,5)" are not expected, but parentheses are
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p for p in parts if p.strip()]


def cmd_convergence(args) -> int:
    ks = _candidates(args.k)
    if len(ks) != 1:
        raise ConfigError("convergence needs a single --k")
    grid = DEFAULT_B_GRID if args.grid is None else tuple(_int_list(args.grid))
    cfg = _config(args, _transform(args.transform, args.alpha))
    data = load_data(args)
    try:
        rows = convergence_study(data, ks[0], args.B_max, grid, args.reps, args.seed, cfg.m,
                                 cfg.transform, cfg.epsilon, cfg.clusterer, cfg.workers)
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise ConfigError(str(exc)) from None
    if not all(math.isfinite(r.abs_error) for r in rows):
        raise NumericError("non-finite convergence error")
    out = _out_dir(args.out)
    write_convergence_csv(rows, out / "convergence.csv")
    summary = convergence_summary(rows)
    for B, s in summary.items():
        print(f"B={B}: median={s['median']:.3g} iqr={s['iqr']:.3g}")
    if args.plot:
        bs = list(summary)
        svg_line_chart({"median": (bs, [summary[b]["median"] for b in bs]),
                        "q3": (bs, [summary[b]["q3"] for b in bs])},
                       out / "convergence.svg", "Absolute error vs B", "B", "|error|")
    return EXIT_OK


def cmd_runtime(args) -> int:
    out = _out_dir(args.out)
    try:
        rows = runtime_benchmark(args.n, args.k, args.d, args.B, args.cap or None, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    write_runtime_csv(rows, out / "runtime.csv")
    for r in rows:
        print(f"n={r.n} {r.method}: {r.seconds:.3f}s")
    if args.plot:
        series = {}
        for r in rows:
            xs, ys = series.setdefault(r.method, ([], []))
            xs.append(r.n)
            ys.append(r.seconds)
        svg_line_chart(series, out / "runtime.svg", "Runtime vs N", "N", "seconds", log_x=True, log_y=True)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = parse_synthetic_id(args.spec, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    data = generate_synthetic(spec)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(data, path)
    print(f"wrote {data.n_rows} rows to {path}")
    return EXIT_OK


COMMANDS = {
    "select": cmd_select,
    "ablation": cmd_ablation,
    "convergence": cmd_convergence,
    "runtime": cmd_runtime,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches the config-error code
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
