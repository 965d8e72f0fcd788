"""Base learners: CART tree, random forest, logistic regression, linear SVM,
gradient-boosted trees; plus shared prediction, importance, and persistence.

Default hyperparameters live in data/default_params.json; the trainers here
take explicit keyword arguments, and ``train_model`` merges the file defaults
with per-call overrides.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .boosting import GbtModel, gbt_predict_proba, train_gbt
from .forest import ForestModel, forest_predict_proba, train_random_forest
from .linear import (
    LinearModel,
    linear_predict_proba,
    logistic_objective,
    softmax,
    svm_objective,
    train_logistic,
    train_svm,
)
from .persist import load_model, model_from_dict, model_to_dict, save_model
from .tree import TreeNode, iter_nodes, train_tree, tree_predict_proba

__all__ = [
    "TreeNode",
    "ForestModel",
    "LinearModel",
    "GbtModel",
    "train_tree",
    "train_random_forest",
    "train_logistic",
    "train_svm",
    "train_gbt",
    "predict_proba",
    "predict_label",
    "feature_importance",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
    "softmax",
    "logistic_objective",
    "svm_objective",
    "train_model",
    "default_params",
    "MODEL_NAMES",
]

MODEL_NAMES = ("logistic", "forest", "svm", "gbt", "stack")

_DEFAULTS: dict | None = None


def default_params(name: str) -> dict:
    """Shipped default hyperparameters for a model kind (a fresh copy)."""
    global _DEFAULTS
    if _DEFAULTS is None:
        ref = resources.files("hmhdim.data").joinpath("default_params.json")
        _DEFAULTS = json.loads(ref.read_text(encoding="utf-8"))
    if name not in _DEFAULTS:
        raise ValueError(f"unknown model kind {name!r}, expected one of {MODEL_NAMES}")
    return json.loads(json.dumps(_DEFAULTS[name]))


def train_model(name: str, table, params: dict | None = None, seed: int = 0):
    """Train any model kind by name with defaults merged under overrides."""
    merged = default_params(name)
    merged.update(params or {})
    if name == "logistic":
        return train_logistic(table, **merged)
    if name == "svm":
        return train_svm(table, seed=seed, **merged)
    if name == "forest":
        return train_random_forest(table, seed=seed, **merged)
    if name == "gbt":
        return train_gbt(table, **merged)
    if name == "stack":
        from ..ensemble import stack_train

        return stack_train(table, seed=seed, **merged)
    raise ValueError(f"unknown model kind {name!r}, expected one of {MODEL_NAMES}")


def _model_width(model) -> int:
    if isinstance(model, TreeNode):
        return model.n_features
    return model.n_features


def predict_proba(model, features) -> np.ndarray:
    """Probability vectors over classes {0,1,2,3}.

    Accepts a single feature vector (returns shape (4,)) or a matrix
    (returns shape (n, 4)). Tree probabilities are leaf count ratios, forest
    is the mean over trees, logistic and GBT use softmax scores, and SVM
    margins pass through softmax as a documented calibration convention.
    """
    X = np.asarray(features, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    width = _model_width(model)
    if width and X.shape[1] != width:
        raise ValueError(f"feature count {X.shape[1]} does not match model ({width})")
    if isinstance(model, TreeNode):
        probs = tree_predict_proba(model, X)
    elif isinstance(model, ForestModel):
        probs = forest_predict_proba(model, X)
    elif isinstance(model, LinearModel):
        probs = linear_predict_proba(model, X)
    elif isinstance(model, GbtModel):
        probs = gbt_predict_proba(model, X)
    else:
        from ..ensemble import StackModel, stack_predict_proba

        if isinstance(model, StackModel):
            probs = stack_predict_proba(model, X)
        else:
            raise TypeError(f"cannot predict with model of type {type(model).__name__}")
    return probs[0] if single else probs


def predict_label(model, features) -> np.ndarray | int:
    """Argmax class; ties resolve to the lowest class index."""
    probs = predict_proba(model, features)
    if probs.ndim == 1:
        return int(np.argmax(probs))
    return np.argmax(probs, axis=1)


def feature_importance(model) -> np.ndarray:
    """Size-weighted impurity-decrease importance, normalized to sum 1.

    Defined for tree-based models (single tree, forest, GBT). A model with
    no effective splits returns the uniform vector so the sum-to-one
    contract holds in degenerate cases.
    """
    if isinstance(model, TreeNode):
        trees = [model]
        d = model.n_features
    elif isinstance(model, ForestModel):
        trees = model.trees
        d = model.n_features
    elif isinstance(model, GbtModel):
        trees = [t for trees in model.rounds for t in trees]
        d = model.n_features
    else:
        raise TypeError(
            f"feature importance is defined for tree-based models, not {type(model).__name__}"
        )
    imp = np.zeros(d, dtype=np.float64)
    for root in trees:
        n_root = root.n_samples
        for node in iter_nodes(root):
            if not node.is_leaf:
                imp[node.feature_index] += (node.n_samples / n_root) * node.gain
    total = imp.sum()
    if total <= 0.0:
        return np.full(d, 1.0 / d)
    return imp / total
