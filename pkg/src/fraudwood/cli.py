"""Command-line entry point: ``fraudwood <command> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .dataset import FeatureSchema, SplitSpec, SynthConfig, read_csv, split, synthesize, write_csv
from .errors import FraudwoodError
from .features import VARIANTS, PipelineSpec, fit_transform
from .metrics import evaluate
from .persist import load_model, save_model
from .sweep import (GridSpec, OutlierRule, emit_scatter, read_sweep_csv, run_sweep,
                    summarize, train_model)
from .boosting import GbdtParams
from .forest import ForestParams

_PRESETS = {"a": "A_like", "b": "B_like", "custom": "custom"}


def _int_range(text: str, parts: int) -> tuple[int, ...]:
    try:
        vals = tuple(int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers separated by ':', got {text!r}")
    if len(vals) != parts:
        raise argparse.ArgumentTypeError(f"expected {parts} ':'-separated integers, got {text!r}")
    return vals


def _ratio(text: str):
    return _int_range(text, 3)


def _depths(text: str):
    return _int_range(text, 2)


def _trees(text: str):
    return _int_range(text, 3)


def _float_list(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def cmd_synth(args) -> None:
    preset = _PRESETS[args.preset]
    kw = {"n_numeric": args.numeric, "n_categorical": args.categorical}
    if args.rows is not None:
        kw["n_rows"] = args.rows
    if args.fraud_rate is not None:
        kw["fraud_rate"] = args.fraud_rate
    if preset == "custom":
        cfg = SynthConfig(preset="custom", seed=args.seed, **kw)
    else:
        cfg = SynthConfig.from_preset(preset, seed=args.seed, **kw)
    table, schema = synthesize(cfg)
    write_csv(table, args.out)
    schema.save(args.schema)


def cmd_split(args) -> None:
    schema = FeatureSchema.load(args.schema)
    table = read_csv(args.input, schema)
    parts = split(table, SplitSpec(args.ratio, args.seed, not args.no_stratify))
    os.makedirs(args.out_dir, exist_ok=True)
    for name, part in zip(("train", "test", "validation"), parts):
        write_csv(part, os.path.join(args.out_dir, f"{name}.csv"))


def cmd_train(args) -> None:
    schema = FeatureSchema.load(args.schema)
    train = read_csv(args.train, schema)
    target = args.pca_components if args.pca_components is not None else args.pca_variance
    fitted, x = fit_transform(train, schema, PipelineSpec(args.variant, target))
    if args.model == "rf":
        params = ForestParams(n_trees=args.n_trees, max_depth=args.max_depth, seed=args.seed)
    else:
        params = GbdtParams(n_trees=args.n_trees, max_depth=args.max_depth,
                            learning_rate=args.learning_rate, seed=args.seed)
    model = train_model(args.model, x, train.labels, params)
    save_model(model, fitted, args.out)


def cmd_evaluate(args) -> None:
    model, pipeline = load_model(args.model)
    schema = FeatureSchema.load(args.schema)
    report = evaluate(model, pipeline, read_csv(args.test, schema),
                      read_csv(args.validation, schema))
    report.save(args.report)
    print(f"auc_test={report.auc_test:.6f} auc_validation={report.auc_validation:.6f}")


def cmd_sweep(args) -> None:
    schema = FeatureSchema.load(args.schema)
    tables = [read_csv(p, schema) for p in (args.train, args.test, args.validation)]
    spec = GridSpec(model=args.model, depths=args.depths, tree_counts=args.trees,
                    learning_rates=args.learning_rates, pipeline_variant=args.variant,
                    seed=args.seed, pca_components=args.pca_variance)

    def report(cell, row):
        print(f"cell {cell.index}: depth={row.depth} n_trees={row.n_trees} "
              f"auc_test={row.auc_test:.4f} auc_validation={row.auc_validation:.4f}",
              file=sys.stderr)

    rows = run_sweep(spec, *tables, schema, workers=args.workers, timing=args.timing,
                     progress=report if args.verbose else None)
    title = f"{args.model} + {args.variant}"
    emit_scatter(rows, args.out, args.svg, title=title)


def cmd_summarize(args) -> None:
    rows = read_sweep_csv(args.input)
    summary = summarize(rows, OutlierRule(args.outliers, args.k))
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    f, u = summary["filtered"]["auc_test"], summary["unfiltered"]["auc_test"]
    print(f"mean auc_test unfiltered={u['mean']:.6f} filtered={f['mean']:.6f} "
          f"removed={len(summary['removed'])}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fraudwood", description=__doc__)
    p.add_argument("--version", action="version", version=f"fraudwood {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic borrower table")
    s.add_argument("--preset", choices=sorted(_PRESETS), default="custom")
    s.add_argument("--rows", type=int)
    s.add_argument("--fraud-rate", type=float)
    s.add_argument("--numeric", type=int, default=64)
    s.add_argument("--categorical", type=int, default=33)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--schema", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("split", help="split a table into train/test/validation")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--schema", required=True)
    s.add_argument("--ratio", type=_ratio, default=(4, 1, 1))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-stratify", action="store_true")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("train", help="fit a pipeline and a model, write a model file")
    s.add_argument("--model", choices=("rf", "gbdt"), required=True)
    s.add_argument("--variant", choices=VARIANTS, default="raw")
    s.add_argument("--max-depth", type=int, required=True)
    s.add_argument("--n-trees", type=int, required=True)
    s.add_argument("--learning-rate", type=float, default=0.1)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--pca-components", type=int)
    g.add_argument("--pca-variance", type=float, default=0.95)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--train", required=True)
    s.add_argument("--schema", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", help="score test and validation tables")
    s.add_argument("--model", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--validation", required=True)
    s.add_argument("--schema", required=True)
    s.add_argument("--report", required=True)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="run a depth x tree-count grid")
    s.add_argument("--model", choices=("rf", "gbdt"), required=True)
    s.add_argument("--variant", choices=VARIANTS, default="tanh")
    s.add_argument("--depths", type=_depths, default=(2, 5))
    s.add_argument("--trees", type=_trees, default=(5, 120, 5))
    s.add_argument("--learning-rates", type=_float_list, default=(0.1,))
    s.add_argument("--pca-variance", type=float, default=0.95)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--validation", required=True)
    s.add_argument("--schema", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--svg", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--timing", action="store_true",
                   help="record per-cell training seconds (output no longer reproducible)")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("summarize", help="outlier-filtered AUC summary of a sweep CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--outliers", choices=("none", "mad"), default="mad")
    s.add_argument("--k", type=float, default=3.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_summarize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FraudwoodError, OSError, ValueError) as e:
        msg = str(e).splitlines()[0] if str(e) else type(e).__name__
        print(f"fraudwood {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
