"""Versioned JSON persistence for every model kind.

Trees serialize as preorder parallel arrays with explicit child indices.
Floats round-trip exactly through JSON (shortest-repr encoding), so a loaded
model predicts bit-identically to the original.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .boosting import GbtModel
from .forest import ForestModel
from .linear import LinearModel
from .tree import TreeNode

FORMAT_VERSION = 1


def _tree_to_arrays(root: TreeNode) -> dict:
    feats, thrs, gains, ns, values, lefts, rights = [], [], [], [], [], [], []

    def walk(node: TreeNode) -> int:
        idx = len(feats)
        feats.append(-1 if node.is_leaf else int(node.feature_index))
        thrs.append(float(node.threshold))
        gains.append(float(node.gain))
        ns.append(int(node.n_samples))
        values.append([float(v) for v in node.value])
        lefts.append(-1)
        rights.append(-1)
        if not node.is_leaf:
            lefts[idx] = walk(node.left)
            rights[idx] = walk(node.right)
        return idx

    walk(root)
    return {
        "feature_index": feats,
        "threshold": thrs,
        "gain": gains,
        "n_samples": ns,
        "value": values,
        "left": lefts,
        "right": rights,
        "n_features": int(root.n_features),
    }


def _tree_from_arrays(d: dict) -> TreeNode:
    nodes = [
        TreeNode(
            value=np.array(d["value"][i], dtype=np.float64),
            n_samples=d["n_samples"][i],
            gain=d["gain"][i],
            feature_index=None if d["feature_index"][i] < 0 else d["feature_index"][i],
            threshold=d["threshold"][i],
        )
        for i in range(len(d["feature_index"]))
    ]
    for i, node in enumerate(nodes):
        if node.feature_index is not None:
            node.left = nodes[d["left"][i]]
            node.right = nodes[d["right"][i]]
    nodes[0].n_features = d.get("n_features", 0)
    return nodes[0]


def model_to_dict(model) -> dict:
    from ..ensemble import StackModel  # local import, avoids a cycle

    if isinstance(model, TreeNode):
        return {"format_version": FORMAT_VERSION, "kind": "tree", "tree": _tree_to_arrays(model)}
    if isinstance(model, ForestModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "forest",
            "seed": model.seed,
            "feature_subsample_size": model.feature_subsample_size,
            "n_features": model.n_features,
            "bootstrap": model.bootstrap,
            "trees": [_tree_to_arrays(t) for t in model.trees],
        }
    if isinstance(model, LinearModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": model.kind,
            "weights": [[float(v) for v in row] for row in model.weights],
            "biases": [float(v) for v in model.biases],
            "regularization": model.regularization,
            "converged": model.converged,
            "n_iter": model.n_iter,
        }
    if isinstance(model, GbtModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "gbt",
            "learning_rate": model.learning_rate,
            "initial_scores": [float(v) for v in model.initial_scores],
            "loss_trace": [float(v) for v in model.loss_trace],
            "n_features": model.n_features,
            "rounds": [[_tree_to_arrays(t) for t in trees] for trees in model.rounds],
        }
    if isinstance(model, StackModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "stack",
            "base_models": {name: model_to_dict(m) for name, m in model.base_models.items()},
            "meta_model": model_to_dict(model.meta_model),
            "meta_feature_layout": [[b, int(c)] for b, c in model.meta_feature_layout],
            "oof_folds": model.oof_folds,
            "seed": model.seed,
            "oof_row_folds": list(model.oof_row_folds),
        }
    raise TypeError(f"cannot serialize model of type {type(model).__name__}")


def model_from_dict(d: dict):
    from ..ensemble import StackModel

    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    kind = d["kind"]
    if kind == "tree":
        return _tree_from_arrays(d["tree"])
    if kind == "forest":
        return ForestModel(
            trees=[_tree_from_arrays(t) for t in d["trees"]],
            seed=d["seed"],
            feature_subsample_size=d["feature_subsample_size"],
            n_features=d["n_features"],
            bootstrap=d["bootstrap"],
        )
    if kind in ("softmax_logistic", "ovr_hinge_svm"):
        return LinearModel(
            weights=np.array(d["weights"], dtype=np.float64),
            biases=np.array(d["biases"], dtype=np.float64),
            regularization=d["regularization"],
            kind=kind,
            converged=d.get("converged", False),
            n_iter=d.get("n_iter", 0),
        )
    if kind == "gbt":
        return GbtModel(
            rounds=[[_tree_from_arrays(t) for t in trees] for trees in d["rounds"]],
            learning_rate=d["learning_rate"],
            initial_scores=np.array(d["initial_scores"], dtype=np.float64),
            loss_trace=list(d["loss_trace"]),
            n_features=d["n_features"],
        )
    if kind == "stack":
        return StackModel(
            base_models={name: model_from_dict(m) for name, m in d["base_models"].items()},
            meta_model=model_from_dict(d["meta_model"]),
            meta_feature_layout=tuple((b, int(c)) for b, c in d["meta_feature_layout"]),
            oof_folds=d["oof_folds"],
            seed=d["seed"],
            oof_row_folds=tuple(d["oof_row_folds"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
