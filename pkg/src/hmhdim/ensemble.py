"""Stacking ensemble: out-of-fold base probabilities feed a GBT meta-learner.

Meta-features for each training row come from base models whose training
fold excluded that row, so the meta-learner never sees leaked first-level
predictions. Bases are refit on the full table for inference. The layout is
canonical (base names sorted, classes ascending) so the configuration order
of the bases cannot change the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CLASSES, DatasetTable, N_CLASSES, stratified_kfold
from .models import predict_proba, train_model
from .models.boosting import GbtModel, train_gbt
from .seeds import derive_seed

DEFAULT_BASE_NAMES = ("forest", "gbt", "logistic", "svm")


@dataclass
class StackModel:
    base_models: dict[str, object]  # refit on the full training table
    meta_model: GbtModel
    meta_feature_layout: tuple[tuple[str, int], ...]  # (base name, class)
    oof_folds: int
    seed: int
    oof_row_folds: tuple[int, ...]  # audit trail: OOF fold id per training row

    @property
    def n_features(self) -> int:
        first = next(iter(self.base_models.values()))
        return first.n_features


def meta_feature_layout(base_names) -> tuple[tuple[str, int], ...]:
    return tuple((b, c) for b in sorted(base_names) for c in CLASSES)


def build_meta_features(models_by_base: dict[str, object], X: np.ndarray) -> np.ndarray:
    """Concatenate per-base probability vectors in canonical layout order."""
    blocks = [predict_proba(models_by_base[b], X) for b in sorted(models_by_base)]
    return np.hstack(blocks)


def stack_train(
    table: DatasetTable,
    base_params: dict[str, dict] | None = None,
    meta_params: dict | None = None,
    oof_folds: int = 5,
    seed: int = 0,
) -> StackModel:
    """Train the two-layer stack.

    ``base_params`` maps base name to hyperparameter overrides and also
    selects the base set; empty or None means the default four bases with
    their default parameters. Per-fold and refit seeds derive from the
    master seed and the base name, never from dict order.
    """
    labels = table.require_labels()
    if oof_folds < 2:
        raise ValueError(f"oof_folds must be >= 2, got {oof_folds}")
    if base_params:
        configs = {name: dict(params) for name, params in base_params.items()}
    else:
        configs = {name: {} for name in DEFAULT_BASE_NAMES}
    base_names = sorted(configs)
    layout = meta_feature_layout(base_names)

    plan = stratified_kfold(table, oof_folds, derive_seed(seed, "stack-oof"))
    n = table.n_rows
    meta_rows = np.zeros((n, len(base_names) * N_CLASSES), dtype=np.float64)
    row_folds = np.full(n, -1, dtype=np.int64)
    for f, fold in enumerate(plan.folds):
        held = np.asarray(fold, dtype=np.int64)
        row_folds[held] = f
        train_idx = np.setdiff1d(np.arange(n), held)
        sub = table.select_rows(train_idx)
        for j, name in enumerate(base_names):
            try:
                model = train_model(name, sub, configs[name], seed=derive_seed(seed, "fold", f, name))
            except ValueError as exc:
                raise ValueError(f"fold {f}, base {name!r}: {exc}") from exc
            cols = slice(j * N_CLASSES, (j + 1) * N_CLASSES)
            meta_rows[held, cols] = predict_proba(model, table.rows[held])

    meta_table = DatasetTable(
        feature_names=tuple(f"meta_{b}_p{c}" for b, c in layout),
        rows=meta_rows,
        labels=labels,
    )
    meta = dict(meta_params or {})
    meta_model = train_gbt(meta_table, **meta)

    refit = {
        name: train_model(name, table, configs[name], seed=derive_seed(seed, "refit", name))
        for name in base_names
    }
    return StackModel(
        base_models=refit,
        meta_model=meta_model,
        meta_feature_layout=layout,
        oof_folds=int(oof_folds),
        seed=int(seed),
        oof_row_folds=tuple(int(v) for v in row_folds),
    )


def stack_predict_proba(model: StackModel, X: np.ndarray) -> np.ndarray:
    meta = build_meta_features(model.base_models, np.atleast_2d(X))
    from .models.boosting import gbt_predict_proba

    return gbt_predict_proba(model.meta_model, meta)


def stack_predict(model: StackModel, features) -> tuple[int, np.ndarray]:
    """Label (ties to the lowest class index) and meta probability vector."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        probs = stack_predict_proba(model, X[None, :])[0]
        return int(np.argmax(probs)), probs
    probs = stack_predict_proba(model, X)
    return np.argmax(probs, axis=1), probs
