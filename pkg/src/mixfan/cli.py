"""Command-line entry points: train, predict, evaluate, simulate, discretize, compare.

Every command echoes its effective settings (seed included) as ``#`` header
lines on stdout and into its CSV outputs, writes delimited results, and
renders companion figures unless ``--no-plots`` is given.  Exit codes:
0 success, 1 pipeline error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import plots, reports
from .data import load_csv, load_schema, save_csv, save_schema
from .discretize import apply_discretization, discretize_all, load_map, save_map
from .em import EmConfig, EmMode
from .errors import MixfanError
from .metrics import LabeledScore
from .models import Classifier, ModelKind
from .protocol import (
    compare_on_datasets,
    cross_validate,
    evaluate_holdout,
    experiment_correlation,
    gs_experiment,
)
from .selection import ScoreKind, select_components
from .util import fmt17

USAGE_ERROR = 2
PIPELINE_ERROR = 1


def _default_seed() -> int:
    env = os.environ.get("MIXFAN_SEED")
    return int(env) if env else 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (default: MIXFAN_SEED or 0)")
    p.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=[k.value for k in ModelKind], default="fan")
    p.add_argument("--score", choices=[s.value for s in ScoreKind], default="icl")
    p.add_argument("--r-max", type=int, default=None, help="component search cap (default: min(20, sqrt(N)))")
    p.add_argument("--em-tol", type=float, default=1e-6, help="relative log-likelihood stopping change")
    p.add_argument("--em-max-iter", type=int, default=500)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--alpha", type=float, default=1.0, help="Dirichlet hyperparameter for every table cell")
    p.add_argument("--cem", action="store_true", help="hard assignments during fitting (icl always uses them)")


def _require_files(*paths: str | None) -> None:
    for path in paths:
        if path is not None and not Path(path).exists():
            raise _Usage(f"file not found: {path}")


class _Usage(Exception):
    pass


def _seed_of(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _config_of(args) -> EmConfig:
    return EmConfig(
        max_iterations=args.em_max_iter,
        tolerance=args.em_tol,
        restarts=args.restarts,
        seed=_seed_of(args),
        mode=EmMode.CEM if args.cem else EmMode.EM,
        alpha=args.alpha,
    )


def _fit_settings(args, extra: dict | None = None) -> dict:
    settings = {
        "command": args.command,
        "seed": _seed_of(args),
        "model": args.model,
        "score": args.score,
        "r_max": args.r_max if args.r_max is not None else "auto",
        "em_tol": args.em_tol,
        "em_max_iter": args.em_max_iter,
        "restarts": args.restarts,
        "alpha": args.alpha,
        "mode": "cem" if args.cem else "em",
    }
    if extra:
        settings.update(extra)
    return settings


def _echo(settings: dict) -> None:
    for line in reports.header_lines(settings):
        print(line)


# ---------------------------------------------------------------- subcommands


def cmd_train(args) -> int:
    _require_files(args.data, args.schema)
    schema = load_schema(args.schema)
    ds = load_csv(args.data, schema, args.missing_marker)
    settings = _fit_settings(args, {"data": args.data, "schema": args.schema, "n": ds.n})
    _echo(settings)
    sr = select_components(
        ds, ModelKind(args.model), ScoreKind(args.score), r_max=args.r_max, cfg=_config_of(args)
    )
    out = Path(args.out)
    text = sr.model.to_json()  # serialize fully before touching the file
    out.write_text(text, encoding="utf-8")
    stem = out.parent / out.stem
    Path(f"{stem}.candidates.csv").write_text(reports.selection_table_csv(sr, settings), encoding="utf-8")
    table = reports.selection_table_text(sr)
    Path(f"{stem}.candidates.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    print(f"selected r_h: {sr.selected_r_h}")
    print(f"model written: {out}")
    if not args.no_plots:
        print(f"figure written: {plots.render_score_curve(sr, f'{stem}.scores.png')}")
    return 0


def cmd_predict(args) -> int:
    _require_files(args.model_file, args.data)
    model = Classifier.load(args.model_file)
    ds = load_csv(args.data, model.schema, args.missing_marker)
    settings = {"command": "predict", "model_file": args.model_file, "data": args.data, "n": ds.n}
    _echo(settings)
    post, pred, log_ev = model.predict_dataset(ds)
    labels = model.schema.class_var.labels
    lines = reports.header_lines(settings)
    lines.append("case," + ",".join(f"p_{lab}" for lab in labels) + ",predicted,log_evidence")
    for i in range(ds.n):
        probs = ",".join(fmt17(x) for x in post[i])
        lines.append(f"{i},{probs},{labels[pred[i]]},{fmt17(log_ev[i])}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"predictions written: {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    if (args.holdout is None) == (args.cv is None):
        raise _Usage("choose exactly one of --cv K or --holdout TEST_CSV")
    prefix = Path(args.out_prefix)
    if args.holdout is not None:
        if args.model_file is None:
            raise _Usage("--holdout needs --model-file")
        _require_files(args.model_file, args.holdout)
        model = Classifier.load(args.model_file)
        test = load_csv(args.holdout, model.schema, args.missing_marker)
        settings = {
            "command": "evaluate",
            "mode": "holdout",
            "model_file": args.model_file,
            "test": args.holdout,
            "n": test.n,
        }
        _echo(settings)
        rep = evaluate_holdout(model, test)
        figure = None
        if not args.no_plots and rep.auc is not None:
            figure = plots.render_roc(rep.scores, positive=1, path=f"{prefix}.roc.png")
    else:
        _require_files(args.data, args.schema)
        schema = load_schema(args.schema)
        ds = load_csv(args.data, schema, args.missing_marker)
        settings = _fit_settings(
            args,
            {"mode": "cv", "folds": args.cv, "data": args.data, "schema": args.schema,
             "n": ds.n, "discretize": args.discretize},
        )
        _echo(settings)
        rep = cross_validate(
            ds,
            ModelKind(args.model),
            ScoreKind(args.score),
            k=args.cv,
            seed=_seed_of(args),
            cfg=_config_of(args),
            r_max=args.r_max,
            discretize=args.discretize,
        )
        figure = None if args.no_plots else plots.render_fold_metrics(rep, f"{prefix}.folds.png")
    text = reports.eval_report_text(rep)
    Path(f"{prefix}.txt").write_text(text, encoding="utf-8")
    Path(f"{prefix}.csv").write_text(reports.eval_report_csv(rep, settings), encoding="utf-8")
    print(text, end="")
    if rep.auc is None:
        print("note: auc omitted (class variable is not binary)")
    print(f"report written: {prefix}.txt, {prefix}.csv")
    if figure is not None:
        print(f"figure written: {figure}")
    return 0


def cmd_simulate(args) -> int:
    _require_files(args.gs)
    gs = Classifier.load(args.gs)
    sizes = [int(s) for s in args.train_sizes.split(",") if s]
    settings = _fit_settings(
        args,
        {"gs": args.gs, "train_sizes": args.train_sizes, "replications": args.reps,
         "test_size": args.test_size, "true_r_h": gs.r_h},
    )
    del settings["model"]  # the gold standard fixes the model kind
    _echo(settings)
    cells = gs_experiment(
        gs,
        train_sizes=sizes,
        replications=args.reps,
        score_kind=ScoreKind(args.score),
        seed=_seed_of(args),
        test_size=args.test_size,
        r_max=args.r_max,
        cfg=_config_of(args),
    )
    prefix = Path(args.out_prefix)
    Path(f"{prefix}.csv").write_text(reports.experiment_csv(cells, settings), encoding="utf-8")
    corr = experiment_correlation(cells)
    if corr is None:
        summary = "correlation skipped: fewer than 5 usable cells or constant column"
    else:
        summary = (
            f"spearman rho(|structural difference|, accuracy) = {corr.statistic:.4f}"
            f"  p = {corr.p_value:.6g}  ({corr.method}, n = {corr.n})"
        )
    Path(f"{prefix}.txt").write_text(summary + "\n", encoding="utf-8")
    print(summary)
    print(f"experiment written: {prefix}.csv")
    if not args.no_plots:
        print(f"figure written: {plots.render_experiment(cells, f'{prefix}.png')}")
    return 0


def cmd_discretize(args) -> int:
    _require_files(args.data, args.schema, args.apply)
    schema = load_schema(args.schema)
    ds = load_csv(args.data, schema, args.missing_marker)
    settings = {"command": "discretize", "data": args.data, "schema": args.schema,
                "seed": _seed_of(args), "apply": args.apply or "-"}
    _echo(settings)
    continuous = [v.name for v in schema.variables if not v.is_discrete]
    prefix = Path(args.out_prefix)
    if not continuous:
        print("warning: no continuous variables; writing input through unchanged")
        save_csv(ds, f"{prefix}.csv", args.missing_marker)
        save_schema(schema, f"{prefix}.schema.json")
        return 0
    dmap = load_map(args.apply) if args.apply else discretize_all(ds)
    out = apply_discretization(ds, dmap)
    save_csv(out, f"{prefix}.csv", args.missing_marker)
    save_schema(out.schema, f"{prefix}.schema.json")
    save_map(dmap, f"{prefix}.map.json")
    for name in continuous:
        print(f"{name}: {len(dmap.cuts[name])} cut(s) -> {dmap.n_bins(name)} bin(s)")
    print(f"written: {prefix}.csv, {prefix}.schema.json, {prefix}.map.json")
    return 0


def cmd_compare(args) -> int:
    named = []
    for data_path in args.data:
        _require_files(data_path)
        schema_path = args.schema or str(Path(data_path).with_suffix("")) + ".schema.json"
        _require_files(schema_path)
        schema = load_schema(schema_path)
        named.append((Path(data_path).stem, load_csv(data_path, schema, args.missing_marker)))
    settings = {
        "command": "compare",
        "seed": _seed_of(args),
        "model_a": args.model_a,
        "model_b": args.model_b,
        "score": args.score,
        "folds": args.cv,
        "r_max": args.r_max if args.r_max is not None else "auto",
        "em_tol": args.em_tol,
        "em_max_iter": args.em_max_iter,
        "restarts": args.restarts,
        "alpha": args.alpha,
        "discretize": args.discretize,
        "datasets": ";".join(n for n, _ in named),
    }
    _echo(settings)
    rep = compare_on_datasets(
        named,
        ModelKind(args.model_a),
        ModelKind(args.model_b),
        ScoreKind(args.score),
        k=args.cv,
        seed=_seed_of(args),
        cfg=EmConfig(
            max_iterations=args.em_max_iter,
            tolerance=args.em_tol,
            restarts=args.restarts,
            seed=_seed_of(args),
            alpha=args.alpha,
        ),
        r_max=args.r_max,
        discretize=args.discretize,
    )
    prefix = Path(args.out_prefix)
    text = reports.comparison_text(rep)
    Path(f"{prefix}.txt").write_text(text, encoding="utf-8")
    scatter_rows = [(r.name, r.acc_a, r.acc_b) for r in rep.rows]
    Path(f"{prefix}.scatter.csv").write_text(
        reports.scatter_csv(scatter_rows, "accuracy", settings), encoding="utf-8"
    )
    print(text, end="")
    print(f"report written: {prefix}.txt, {prefix}.scatter.csv")
    if not args.no_plots:
        fig = plots.render_accuracy_scatter(rep, args.model_a, args.model_b, f"{prefix}.png")
        print(f"figure written: {fig}")
    return 0


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixfan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="select components, fit, and save a model")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--missing-marker", default="?")
    _add_fit_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="class posteriors of a saved model on a CSV")
    p.add_argument("--model-file", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--missing-marker", default="?")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="cross-validated or hold-out evaluation")
    p.add_argument("--data", help="training data (cv mode)")
    p.add_argument("--schema", help="schema for --data (cv mode)")
    p.add_argument("--cv", type=int, default=None, help="fold count")
    p.add_argument("--holdout", default=None, help="test CSV (hold-out mode)")
    p.add_argument("--model-file", default=None, help="saved model (hold-out mode)")
    p.add_argument("--discretize", action="store_true", help="fit cuts per training fold")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--missing-marker", default="?")
    _add_fit_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="gold-standard sampling experiment")
    p.add_argument("--gs", required=True, help="gold-standard model file")
    p.add_argument("--train-sizes", default="200,1000,5000")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--test-size", type=int, default=2000)
    p.add_argument("--out-prefix", required=True)
    _add_fit_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("discretize", help="fit or apply class-driven cut points")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--apply", default=None, help="existing map file to apply instead of fitting")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--missing-marker", default="?")
    _add_common(p)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("compare", help="paired CV of two model kinds across datasets")
    p.add_argument("--data", nargs="+", required=True, help="dataset CSVs (schema: X.schema.json beside X.csv)")
    p.add_argument("--schema", default=None, help="shared schema for all datasets")
    p.add_argument("--model-a", choices=[k.value for k in ModelKind], default="fan")
    p.add_argument("--model-b", choices=[k.value for k in ModelKind], default="nb")
    p.add_argument("--score", choices=[s.value for s in ScoreKind], default="icl")
    p.add_argument("--cv", type=int, default=10)
    p.add_argument("--r-max", type=int, default=None)
    p.add_argument("--em-tol", type=float, default=1e-6)
    p.add_argument("--em-max-iter", type=int, default=500)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--discretize", action="store_true")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--missing-marker", default="?")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (MixfanError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PIPELINE_ERROR


if __name__ == "__main__":
    sys.exit(main())
