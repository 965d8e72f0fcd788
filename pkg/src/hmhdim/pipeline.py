"""Experiment orchestration: featurize, split, resample, train, evaluate, CV.

Two SMOTE placements are first-class. ``global`` oversamples the whole table
before any split, which reproduces balanced test supports but leaks synthetic
neighbors of test rows into training; reports carry a leakage_prone flag when
it is used. ``train_only`` applies SMOTE inside each training partition and
is the leakage-safe protocol. Standardization is always fit on training rows
only, in every mode.

Reports are plain data; identical config and data produce byte-identical
report JSON.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    DatasetTable,
    class_distribution,
    load_csv,
    load_schema,
    stratified_kfold,
    stratified_split,
)
from .features import (
    build_matrix,
    feature_manifest,
    records_from_table,
    standardize_apply,
    standardize_fit,
)
from .formula import MassTable
from .metrics import ClassReport, RocCurve, classification_report, roc_curve_ovr
from .models import feature_importance, predict_proba, train_model
from .resample import SmoteConfig, smote
from .seeds import derive_seed

FEATURE_MODES = ("original_only", "with_interactions")
SMOTE_MODES = ("off", "global", "train_only")


@dataclass
class ExperimentConfig:
    feature_mode: str = "with_interactions"
    smote_mode: str = "off"
    smote: SmoteConfig = field(default_factory=SmoteConfig)
    model: str = "gbt"
    model_params: dict = field(default_factory=dict)
    test_fraction: float = 0.2
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    cv_k: int | None = 5
    cv_seed: int = 0
    extra_pairwise: tuple[tuple[str, str], ...] = ()
    threads: int = 1

    def __post_init__(self):
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"feature_mode must be one of {FEATURE_MODES}")
        if self.smote_mode not in SMOTE_MODES:
            raise ValueError(f"smote_mode must be one of {SMOTE_MODES}")
        if not self.seeds:
            raise ValueError("seed list must be non-empty")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        split = d.get("split", {})
        cv = d.get("cv", {})
        cv_k = cv.get("k", 5) if cv is not None else None
        return cls(
            feature_mode=d.get("feature_mode", "with_interactions"),
            smote_mode=d.get("smote_mode", "off"),
            smote=SmoteConfig(**d.get("smote", {})),
            model=d.get("model", "gbt"),
            model_params=dict(d.get("model_params", {})),
            test_fraction=float(split.get("test_fraction", 0.2)),
            seeds=tuple(int(s) for s in split.get("seeds", (0, 1, 2, 3, 4))),
            cv_k=cv_k,
            cv_seed=int(cv.get("seed", 0)) if cv is not None else 0,
            extra_pairwise=tuple(tuple(p) for p in d.get("extra_pairwise", ())),
            threads=int(d.get("threads", 1)),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "feature_mode": self.feature_mode,
            "smote_mode": self.smote_mode,
            "smote": self.smote.to_dict(),
            "model": self.model,
            "model_params": dict(self.model_params),
            "split": {"test_fraction": self.test_fraction, "seeds": list(self.seeds)},
            "cv": None if self.cv_k is None else {"k": self.cv_k, "seed": self.cv_seed},
            "extra_pairwise": [list(p) for p in self.extra_pairwise],
            "threads": self.threads,
        }

    def with_env_overrides(self) -> "ExperimentConfig":
        """Apply HMHDIM_SEEDS and HMHDIM_THREADS environment overrides."""
        seeds = self.seeds
        threads = self.threads
        raw = os.environ.get("HMHDIM_SEEDS")
        if raw:
            seeds = tuple(int(s) for s in raw.split(",") if s.strip())
        raw = os.environ.get("HMHDIM_THREADS")
        if raw:
            threads = int(raw)
        return ExperimentConfig(
            feature_mode=self.feature_mode,
            smote_mode=self.smote_mode,
            smote=self.smote,
            model=self.model,
            model_params=self.model_params,
            test_fraction=self.test_fraction,
            seeds=seeds,
            cv_k=self.cv_k,
            cv_seed=self.cv_seed,
            extra_pairwise=self.extra_pairwise,
            threads=threads,
        )


@dataclass
class SeedRunResult:
    seed: int
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    report: ClassReport
    curves: list[RocCurve]
    auc_by_class: dict[int, float]
    model: object
    importances: dict[str, float] | None
    n_synthetic: int
    # (base, neighbor, lambda) with indices into the table given to the run
    smote_provenance: list[tuple[int, int, float]]


@dataclass
class EvaluationReport:
    config: dict
    provenance: dict
    per_seed: list[dict]
    averaged: dict
    auc_by_class: dict[int, float]
    roc_curves: list[RocCurve]
    feature_importances: dict[str, float] | None
    cv: dict | None
    sidecars: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "provenance": self.provenance,
            "per_seed": self.per_seed,
            "averaged": self.averaged,
            "auc_by_class": {str(c): v for c, v in sorted(self.auc_by_class.items())},
            "roc_curves": [c.to_dict() for c in self.roc_curves],
            "feature_importances": self.feature_importances,
            "cv": self.cv,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def table_hash(table: DatasetTable) -> str:
    """Content hash of names, rows, labels, and ids; split-order sensitive."""
    h = hashlib.sha256()
    h.update("\x1f".join(table.feature_names).encode("utf-8"))
    h.update(np.ascontiguousarray(table.rows).tobytes())
    if table.labels is not None:
        h.update(np.ascontiguousarray(table.labels).tobytes())
    if table.row_ids is not None:
        h.update("\x1f".join(table.row_ids).encode("utf-8"))
    return h.hexdigest()


def featurize_table(raw: DatasetTable, config: ExperimentConfig, masses: MassTable | None = None) -> DatasetTable:
    """Expand a descriptor table into the model feature matrix.

    Tables without formula text columns are treated as already featurized
    and pass through unchanged.
    """
    if not raw.text_columns:
        return raw
    records = records_from_table(raw)
    return build_matrix(
        records,
        masses=masses,
        include_interactions=config.feature_mode == "with_interactions",
        labels=raw.labels,
        row_ids=raw.row_ids,
        extra_pairwise=config.extra_pairwise,
    )


def load_experiment_table(data_path, schema_path, config: ExperimentConfig) -> DatasetTable:
    schema = load_schema(schema_path)
    raw = load_csv(data_path, schema)
    return featurize_table(raw, config)


def _model_importances(model, names) -> dict[str, float] | None:
    from .ensemble import StackModel

    target = model
    if isinstance(model, StackModel):
        target = model.base_models.get("gbt") or model.base_models.get("forest")
        if target is None:
            return None
    try:
        imp = feature_importance(target)
    except TypeError:
        return None
    return {name: float(v) for name, v in zip(names, imp)}


def run_single_split(config: ExperimentConfig, table: DatasetTable, seed: int) -> SeedRunResult:
    """One train/test evaluation at one seed on an already-featurized table.

    ``smote_mode=global`` must be resolved by the caller (the table is then
    already augmented); this function applies only the train_only placement.
    """
    plan = stratified_split(table, config.test_fraction, seed)
    train = table.select_rows(plan.train_indices)
    test = table.select_rows(plan.test_indices)

    provenance: list[tuple[int, int, float]] = []
    n_synthetic = 0
    if config.smote_mode == "train_only":
        smote_cfg = SmoteConfig(
            k_neighbors=config.smote.k_neighbors,
            target_per_class=config.smote.target_per_class,
            seed=derive_seed(config.smote.seed, "train_only", seed),
            random_base=config.smote.random_base,
        )
        train, samples = smote(train, smote_cfg)
        # Map provenance back to indices into ``table``.
        provenance = [
            (plan.train_indices[s.base_index], plan.train_indices[s.neighbor_index], s.lam)
            for s in samples
        ]
        n_synthetic = len(samples)

    params = standardize_fit(train)
    train_z = standardize_apply(train, params)
    test_z = standardize_apply(test, params)

    model = train_model(config.model, train_z, config.model_params, seed=derive_seed(seed, "model"))
    probs = predict_proba(model, test_z.rows)
    preds = np.argmax(probs, axis=1)
    test_labels = test.require_labels()
    report = classification_report(test_labels, preds)

    curves = []
    present = sorted(set(test_labels.tolist()))
    if len(present) >= 2:
        curves = [roc_curve_ovr(test_labels, probs, c) for c in present]
    auc = {c.cls: c.auc for c in curves}
    return SeedRunResult(
        seed=int(seed),
        train_indices=plan.train_indices,
        test_indices=plan.test_indices,
        report=report,
        curves=curves,
        auc_by_class=auc,
        model=model,
        importances=_model_importances(model, table.feature_names),
        n_synthetic=n_synthetic,
        smote_provenance=provenance,
    )


def _average_reports(reports: list[ClassReport]) -> dict:
    classes = sorted({c for r in reports for c in r.classes})
    out = {"classes": classes, "precision": {}, "recall": {}, "f1": {}, "support": {}}
    for c in classes:
        rows = [r for r in reports if c in r.classes]
        out["precision"][str(c)] = float(np.mean([r.precision[c] for r in rows]))
        out["recall"][str(c)] = float(np.mean([r.recall[c] for r in rows]))
        out["f1"][str(c)] = float(np.mean([r.f1[c] for r in rows]))
        out["support"][str(c)] = float(np.mean([r.support[c] for r in rows]))
    out["macro_f1"] = float(np.mean([r.macro_f1 for r in reports]))
    out["accuracy"] = float(np.mean([r.accuracy for r in reports]))
    return out


def run_experiment(
    config: ExperimentConfig,
    data,
    schema=None,
    out_dir=None,
    source: str | None = None,
) -> EvaluationReport:
    """Full staged workflow; see the module docstring.

    ``data`` is either a DatasetTable or a descriptor CSV path (then
    ``schema`` names the column-role JSON). Descriptor tables are featurized
    per the config; already-numeric tables pass through. Stages are annotated
    in errors. When ``out_dir`` is given, report JSON, per-class CSV, ROC
    point CSVs, the feature manifest, and resampling provenance sidecars are
    written there (idempotently).
    """
    config = config.with_env_overrides()
    if isinstance(data, DatasetTable):
        table = featurize_table(data, config)
    else:
        if schema is None:
            raise ValueError("a schema path is required when data is a CSV path")
        table = load_experiment_table(data, schema, config)
        source = source or str(data)
    sidecars: dict = {}
    work = table
    global_counts = None
    if config.smote_mode == "global":
        try:
            work, samples = smote(table, config.smote)
        except ValueError as exc:
            raise ValueError(f"stage resample (global): {exc}") from exc
        sidecars["smote_provenance_global"] = [s.to_dict() for s in samples]
        global_counts = {str(c): n for c, n in class_distribution(work).items()}

    seed_results: list[SeedRunResult] = []
    for seed in config.seeds:
        try:
            seed_results.append(run_single_split(config, work, seed))
        except ValueError as exc:
            raise ValueError(f"stage evaluate (seed {seed}): {exc}") from exc

    cv_section = None
    if config.cv_k is not None:
        try:
            fold_scores, mean_f1, spread = cross_validate(config, work)
        except ValueError as exc:
            raise ValueError(f"stage cross_validate: {exc}") from exc
        cv_section = {
            "k": config.cv_k,
            "seed": config.cv_seed,
            "fold_macro_f1": fold_scores,
            "mean_f1": mean_f1,
            "spread": spread,
        }

    auc_avg: dict[int, float] = {}
    all_classes = sorted({c for r in seed_results for c in r.auc_by_class})
    for c in all_classes:
        vals = [r.auc_by_class[c] for r in seed_results if c in r.auc_by_class]
        auc_avg[c] = float(np.mean(vals))

    per_seed = []
    for r in seed_results:
        entry = {
            "seed": r.seed,
            "n_train": len(r.train_indices),
            "n_test": len(r.test_indices),
            "n_synthetic": r.n_synthetic,
            "class_report": r.report.to_dict(),
            "auc_by_class": {str(c): v for c, v in sorted(r.auc_by_class.items())},
        }
        per_seed.append(entry)
        if r.smote_provenance:
            sidecars[f"smote_provenance_seed{r.seed}"] = [
                {"base_index": b, "neighbor_index": nn, "lambda": lam}
                for b, nn, lam in r.smote_provenance
            ]

    report = EvaluationReport(
        config=config.to_dict(),
        provenance={
            "dataset_hash": table_hash(table),
            "n_rows": table.n_rows,
            "n_features": table.n_features,
            "package_version": __version__,
            "source": source,
            "leakage_prone": config.smote_mode == "global",
            "class_counts": {str(c): n for c, n in class_distribution(table).items()},
            "class_counts_after_global_smote": global_counts,
        },
        per_seed=per_seed,
        averaged=_average_reports([r.report for r in seed_results]),
        auc_by_class=auc_avg,
        roc_curves=seed_results[0].curves,
        feature_importances=seed_results[0].importances,
        cv=cv_section,
        sidecars=sidecars,
    )
    if out_dir is not None:
        write_report_artifacts(report, out_dir, config)
    return report


def cross_validate(config: ExperimentConfig, table: DatasetTable):
    """Per-fold macro F1 on held-out folds; returns (scores, mean, spread).

    In train_only mode SMOTE runs inside each training fold; in global mode
    the caller passes the already-augmented table.
    """
    if config.cv_k is None or config.cv_k < 2:
        raise ValueError("cv requires k >= 2")
    plan = stratified_kfold(table, config.cv_k, config.cv_seed)
    n = table.n_rows
    scores = []
    for f, fold in enumerate(plan.folds):
        held = np.asarray(fold, dtype=np.int64)
        train_idx = np.setdiff1d(np.arange(n), held)
        train = table.select_rows(train_idx)
        test = table.select_rows(held)
        if config.smote_mode == "train_only":
            smote_cfg = SmoteConfig(
                k_neighbors=config.smote.k_neighbors,
                target_per_class=config.smote.target_per_class,
                seed=derive_seed(config.smote.seed, "cv", f),
                random_base=config.smote.random_base,
            )
            train, _ = smote(train, smote_cfg)
        params = standardize_fit(train)
        train_z = standardize_apply(train, params)
        test_z = standardize_apply(test, params)
        model = train_model(
            config.model, train_z, config.model_params, seed=derive_seed(config.cv_seed, "cv-model", f)
        )
        preds = np.argmax(predict_proba(model, test_z.rows), axis=1)
        scores.append(classification_report(test.require_labels(), preds).macro_f1)
    mean = float(np.mean(scores))
    spread = float(max(scores) - min(scores))
    return [float(s) for s in scores], mean, spread


def grid_search(
    table: DatasetTable,
    model_name: str,
    param_grid: dict[str, list],
    k: int = 5,
    seed: int = 0,
):
    """Exhaustive hyperparameter search scored by k-fold CV macro F1.

    Returns (best_params, results); ties keep the earliest combination in
    deterministic grid order.
    """
    names = sorted(param_grid)
    combos = [dict(zip(names, values)) for values in itertools.product(*(param_grid[n] for n in names))]
    results = []
    best = None
    for params in combos:
        cfg = ExperimentConfig(
            feature_mode="with_interactions",
            smote_mode="off",
            model=model_name,
            model_params=params,
            cv_k=k,
            cv_seed=seed,
        )
        _, mean_f1, spread = cross_validate(cfg, table)
        results.append({"params": params, "mean_f1": mean_f1, "spread": spread})
        if best is None or mean_f1 > best[0]:
            best = (mean_f1, params)
    return best[1], results


def write_report_artifacts(report: EvaluationReport, out_dir, config: ExperimentConfig) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "config.json").write_text(
        json.dumps(report.config, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    lines = ["class,precision,recall,f1,support"]
    avg = report.averaged
    for c in avg["classes"]:
        key = str(c)
        lines.append(
            f"{c},{avg['precision'][key]:.6f},{avg['recall'][key]:.6f},"
            f"{avg['f1'][key]:.6f},{avg['support'][key]:.2f}"
        )
    lines.append(f"macro_f1,,,{avg['macro_f1']:.6f},")
    lines.append(f"accuracy,,,{avg['accuracy']:.6f},")
    (out / "report.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    for curve in report.roc_curves:
        rows = ["fpr,tpr,threshold"]
        for (x, y), t in zip(curve.points, curve.thresholds):
            t_repr = "inf" if np.isinf(t) else f"{t:.12g}"
            rows.append(f"{x:.12g},{y:.12g},{t_repr}")
        (out / f"roc_points_class{curve.cls}.csv").write_text(
            "\n".join(rows) + "\n", encoding="utf-8"
        )

    manifest = feature_manifest(
        include_interactions=config.feature_mode == "with_interactions",
        extra_pairwise=config.extra_pairwise,
    )
    (out / "feature_manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    for name, payload in report.sidecars.items():
        (out / f"{name}.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
