"""Command-line interface: each pipeline stage plus whole experiments.

Every artifact-writing command is idempotent: identical inputs and --seed
rewrite byte-identical files. All randomness flows from explicit seeds; there
are no hidden entropy sources. Stage failures exit 1 with the stage named on
stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import DatasetTable, class_distribution, load_csv, load_schema
from .features import (
    INTERACTION_FEATURES,
    StandardizationParams,
    feature_manifest,
    standardize_apply,
    standardize_fit,
)
from .figures import write_cv_figure, write_roc_figure
from .formula import parse_formula
from .metrics import classification_report, roc_curve_ovr
from .models import (
    MODEL_NAMES,
    model_from_dict,
    model_to_dict,
    predict_proba,
    train_model,
)
from .pipeline import (
    ExperimentConfig,
    cross_validate,
    featurize_table,
    run_experiment,
    table_hash,
)
from .resample import SmoteConfig, smote
from .seeds import derive_seed

BUNDLE_VERSION = 1


def _fmt_cell(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _write_feature_csv(table: DatasetTable, path: Path) -> None:
    cols = []
    if table.row_ids is not None:
        cols.append("id")
    cols += list(table.feature_names)
    if table.labels is not None:
        cols.append("label")
    lines = [",".join(cols)]
    for i in range(table.n_rows):
        cells = []
        if table.row_ids is not None:
            cells.append(table.row_ids[i])
        cells += [_fmt_cell(v) for v in table.rows[i]]
        if table.labels is not None:
            cells.append(str(int(table.labels[i])))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_feature_schema(table: DatasetTable, path: Path) -> None:
    schema = {}
    if table.row_ids is not None:
        schema["id"] = "id"
    for name in table.feature_names:
        schema[name] = "feature_numeric"
    if table.labels is not None:
        schema["label"] = "label"
    path.write_text(json.dumps(schema, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _load_table(data, schema_path, require_label=True) -> DatasetTable:
    schema = load_schema(schema_path)
    return load_csv(data, schema, require_label=require_label)


def _featurized(table: DatasetTable, features_flag: str) -> DatasetTable:
    cfg = ExperimentConfig(
        feature_mode="with_interactions" if features_flag == "interactions" else "original_only",
        cv_k=None,
    )
    return featurize_table(table, cfg)


def _config_from_args(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
    updates = {}
    if getattr(args, "features", None):
        updates["feature_mode"] = (
            "with_interactions" if args.features == "interactions" else "original_only"
        )
    if getattr(args, "smote_mode", None):
        updates["smote_mode"] = args.smote_mode.replace("-", "_")
    if getattr(args, "model", None):
        updates["model"] = args.model
    if getattr(args, "seed", None) is not None:
        updates["seeds"] = (args.seed,)
        updates["cv_seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        updates["threads"] = args.threads
    if not updates:
        return cfg
    d = cfg.to_dict()
    d["feature_mode"] = updates.get("feature_mode", d["feature_mode"])
    d["smote_mode"] = updates.get("smote_mode", d["smote_mode"])
    d["model"] = updates.get("model", d["model"])
    d["threads"] = updates.get("threads", d["threads"])
    if "seeds" in updates:
        d["split"]["seeds"] = list(updates["seeds"])
        if d["cv"] is not None:
            d["cv"]["seed"] = updates["cv_seed"]
    return ExperimentConfig.from_dict(d)


def cmd_parse(args) -> int:
    comp = parse_formula(args.formula)
    print(json.dumps(comp.to_dict(), sort_keys=True))
    return 0


def cmd_featurize(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    raw = _load_table(args.data, args.schema)
    table = _featurized(raw, args.features)
    _write_feature_csv(table, out / "features.csv")
    _write_feature_schema(table, out / "features_schema.json")
    manifest = feature_manifest(include_interactions=args.features == "interactions")
    (out / "feature_manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {table.n_rows} rows x {table.n_features} features to {out / 'features.csv'}")
    return 0


def cmd_resample(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    raw = _load_table(args.data, args.schema)
    table = _featurized(raw, args.features)
    target = "auto" if args.target == "auto" else int(args.target)
    cfg = SmoteConfig(k_neighbors=args.k, target_per_class=target, seed=args.seed)
    augmented, samples = smote(table, cfg)
    _write_feature_csv(augmented, out / "augmented.csv")
    _write_feature_schema(augmented, out / "augmented_schema.json")
    (out / "smote_provenance.json").write_text(
        json.dumps([s.to_dict() for s in samples], sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    dist = class_distribution(augmented)
    print(f"wrote {augmented.n_rows} rows ({len(samples)} synthetic) to {out / 'augmented.csv'}")
    print("class counts: " + json.dumps({str(k): v for k, v in dist.items()}, sort_keys=True))
    return 0


def cmd_train(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    raw = _load_table(args.data, args.schema)
    table = _featurized(raw, args.features)
    params = standardize_fit(table)
    table_z = standardize_apply(table, params)
    overrides = {}
    if args.params:
        with open(args.params, encoding="utf-8") as fh:
            overrides = json.load(fh)
    model = train_model(args.model, table_z, overrides, seed=derive_seed(args.seed, "cli-train"))
    bundle = {
        "format_version": BUNDLE_VERSION,
        "model_kind": args.model,
        "feature_names": list(table.feature_names),
        "standardization": params.to_dict(),
        "model": model_to_dict(model),
        "seed": args.seed,
    }
    path = out / "model.json"
    path.write_text(json.dumps(bundle, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    print(f"trained {args.model} on {table.n_rows} rows, wrote {path}")
    return 0


def _load_bundle(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        bundle = json.load(fh)
    if bundle.get("format_version") != BUNDLE_VERSION:
        raise ValueError(f"unsupported model bundle version {bundle.get('format_version')!r}")
    model = model_from_dict(bundle["model"])
    params = StandardizationParams.from_dict(bundle["standardization"])
    return bundle, model, params


def _table_for_bundle(args, bundle, require_label) -> DatasetTable:
    raw = _load_table(args.data, args.schema, require_label=require_label)
    names = bundle["feature_names"]
    interactions = any(n in names for n in INTERACTION_FEATURES)
    table = _featurized(raw, "interactions" if interactions else "original")
    if list(table.feature_names) != names:
        raise ValueError(
            "data columns do not match the model's training features; "
            f"expected {names[:3]}... got {list(table.feature_names)[:3]}..."
        )
    return table


def cmd_predict(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bundle, model, params = _load_bundle(args.model)
    table = _table_for_bundle(args, bundle, require_label=False)
    table_z = standardize_apply(table, params)
    probs = predict_proba(model, table_z.rows)
    preds = np.argmax(probs, axis=1)
    lines = ["id,predicted_label,p0,p1,p2,p3"]
    for i in range(table.n_rows):
        rid = table.row_ids[i] if table.row_ids is not None else str(i)
        lines.append(
            f"{rid},{int(preds[i])}," + ",".join(repr(float(p)) for p in probs[i])
        )
    (out / "predictions.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {table.n_rows} predictions to {out / 'predictions.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bundle, model, params = _load_bundle(args.model)
    table = _table_for_bundle(args, bundle, require_label=True)
    table_z = standardize_apply(table, params)
    probs = predict_proba(model, table_z.rows)
    preds = np.argmax(probs, axis=1)
    labels = table.require_labels()
    report = classification_report(labels, preds)
    present = sorted(set(labels.tolist()))
    curves = [roc_curve_ovr(labels, probs, c) for c in present] if len(present) >= 2 else []
    payload = {
        "model_kind": bundle["model_kind"],
        "dataset_hash": table_hash(table),
        "class_report": report.to_dict(),
        "auc_by_class": {str(c.cls): c.auc for c in curves},
        "roc_curves": [c.to_dict() for c in curves],
    }
    (out / "report.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    lines = ["class,precision,recall,f1,support"]
    for c in report.classes:
        lines.append(
            f"{c},{report.precision[c]:.6f},{report.recall[c]:.6f},"
            f"{report.f1[c]:.6f},{report.support[c]}"
        )
    (out / "report.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for curve in curves:
        rows = ["fpr,tpr,threshold"]
        for (x, y), t in zip(curve.points, curve.thresholds):
            t_repr = "inf" if np.isinf(t) else f"{t:.12g}"
            rows.append(f"{x:.12g},{y:.12g},{t_repr}")
        (out / f"roc_points_class{curve.cls}.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"macro F1 {report.macro_f1:.4f}, accuracy {report.accuracy:.4f}; wrote {out / 'report.json'}")
    return 0


def cmd_crossval(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config_from_args(args).with_env_overrides()
    if cfg.cv_k is None:
        raise ValueError("config has cv disabled; set cv.k")
    raw = _load_table(args.data, args.schema)
    table = featurize_table(raw, cfg)
    work = table
    if cfg.smote_mode == "global":
        work, _ = smote(table, cfg.smote)
    scores, mean_f1, spread = cross_validate(cfg, work)
    payload = {
        "config": cfg.to_dict(),
        "dataset_hash": table_hash(table),
        "cv": {
            "k": cfg.cv_k,
            "seed": cfg.cv_seed,
            "fold_macro_f1": scores,
            "mean_f1": mean_f1,
            "spread": spread,
        },
    }
    (out / "cv.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(
        f"cv mean macro F1 {mean_f1:.4f} (spread {spread:.4f}) over {cfg.cv_k} folds; "
        f"wrote {out / 'cv.json'}"
    )
    return 0


def cmd_experiment(args) -> int:
    cfg = _config_from_args(args)
    report = run_experiment(cfg, args.data, schema=args.schema, out_dir=args.out)
    avg = report.averaged
    print(f"experiment complete; artifacts in {args.out}")
    for c in avg["classes"]:
        print(f"class {c}: F1 {avg['f1'][str(c)]:.3f} (support {avg['support'][str(c)]:.1f})")
    print(f"macro F1 {avg['macro_f1']:.4f}, accuracy {avg['accuracy']:.4f}")
    if report.cv is not None:
        print(f"cv mean macro F1 {report.cv['mean_f1']:.4f} (spread {report.cv['spread']:.4f})")
    return 0


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = Path(args.report)
    if not path.exists():
        raise FileNotFoundError(f"report file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    wrote = []
    curves = payload.get("roc_curves") or []
    if curves:
        from .metrics import RocCurve

        parsed = [
            RocCurve(
                cls=int(c["class"]),
                points=tuple((float(x), float(y)) for x, y in c["points"]),
                thresholds=tuple(
                    float("inf") if t == "inf" else float(t) for t in c["thresholds"]
                ),
                auc=float(c["auc"]),
            )
            for c in curves
        ]
        write_roc_figure(parsed, out / "roc_curves.svg")
        wrote.append("roc_curves.svg")
    cv = payload.get("cv")
    if cv:
        write_cv_figure(cv["fold_macro_f1"], cv["mean_f1"], out / "cv_scores.svg")
        wrote.append("cv_scores.svg")
    if not wrote:
        raise ValueError("report contains neither ROC curves nor CV scores to plot")
    print(f"wrote {', '.join(wrote)} to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmhdim",
        description="Dimensionality classification workflows for hybrid metal halide descriptor tables.",
    )
    parser.add_argument("--version", action="version", version=f"hmhdim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a chemical formula to JSON element counts")
    p.add_argument("formula", help="formula string, e.g. '(C6H14N)2PbI4'")
    p.set_defaults(handler=cmd_parse)

    def add_io(p, label=True, features_flag=True):
        p.add_argument("--data", required=True, help="input CSV path")
        p.add_argument("--schema", required=True, help="column-role schema JSON path")
        p.add_argument("--out", required=True, help="output directory")
        if features_flag:
            p.add_argument(
                "--features",
                choices=("original", "interactions"),
                default="interactions",
                help="feature set for descriptor CSVs (default: interactions)",
            )

    p = sub.add_parser("featurize", help="expand descriptors into the feature matrix CSV")
    add_io(p)
    p.set_defaults(handler=cmd_featurize)

    p = sub.add_parser("resample", help="SMOTE-oversample a dataset to balanced class counts")
    add_io(p)
    p.add_argument("--target", default="auto", help="per-class target count or 'auto' (majority)")
    p.add_argument("--k", type=int, default=5, help="SMOTE neighbor count (default 5)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.set_defaults(handler=cmd_resample)

    p = sub.add_parser("train", help="train one model on a dataset and save it as JSON")
    add_io(p)
    p.add_argument("--model", choices=MODEL_NAMES, default="gbt")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params", help="JSON file of hyperparameter overrides")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", help="predict labels and probabilities with a saved model")
    p.add_argument("--model", required=True, help="model.json from 'train'")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("evaluate", help="evaluate a saved model on labeled data")
    p.add_argument("--model", required=True, help="model.json from 'train'")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_evaluate)

    def add_experiment_flags(p):
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--data", required=True)
        p.add_argument("--schema", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, help="override the config seed list with one seed")
        p.add_argument(
            "--smote-mode",
            dest="smote_mode",
            choices=("off", "global", "train-only"),
            help="override the config SMOTE placement",
        )
        p.add_argument(
            "--features",
            choices=("original", "interactions"),
            help="override the config feature mode",
        )
        p.add_argument("--model", choices=MODEL_NAMES, help="override the config model")
        p.add_argument(
            "--threads",
            type=int,
            help="worker hint recorded in the report; execution is single-threaded",
        )

    p = sub.add_parser("crossval", help="stratified k-fold cross-validation")
    add_experiment_flags(p)
    p.set_defaults(handler=cmd_crossval)

    p = sub.add_parser("experiment", help="full multi-seed experiment with report artifacts")
    add_experiment_flags(p)
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("report", help="render SVG figures from an experiment report")
    p.add_argument("--report", required=True, help="report.json path")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
