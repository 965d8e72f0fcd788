"""Gradient-boosted trees with multiclass softmax loss.

Each round fits one regression tree per class to the softmax residuals
(one-hot minus predicted probability); leaf values are Newton steps. The
round's contribution is scaled by the learning rate, halving further if the
training log-loss would rise, so the recorded loss trace is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import DatasetTable, N_CLASSES
from .linear import softmax
from .tree import TreeNode, grow_regression_tree, scale_leaf_values, tree_apply


@dataclass
class GbtModel:
    rounds: list[list[TreeNode]]  # one regression tree per class per round
    learning_rate: float
    initial_scores: np.ndarray  # per-class prior log-odds
    loss_trace: list[float]  # length n_rounds + 1; [0] is the prior-only loss
    n_features: int


def _log_loss(scores: np.ndarray, labels: np.ndarray) -> float:
    probs = softmax(scores)
    picked = np.clip(probs[np.arange(len(labels)), labels], 1e-15, None)
    return float(-np.mean(np.log(picked)))


def train_gbt(
    table: DatasetTable,
    n_rounds: int = 200,
    learning_rate: float = 0.1,
    max_depth: int = 3,
    min_samples_leaf: int = 1,
) -> GbtModel:
    labels = table.require_labels()
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
    if not 0.0 < learning_rate <= 1.0:
        raise ValueError(f"learning_rate must be in (0, 1], got {learning_rate}")
    n = table.n_rows
    X = table.rows
    onehot = np.zeros((n, N_CLASSES))
    onehot[np.arange(n), labels] = 1.0
    priors = np.clip(onehot.mean(axis=0), 1e-6, None)
    initial = np.log(priors)
    scores = np.tile(initial, (n, 1))
    trace = [_log_loss(scores, labels)]
    rounds: list[list[TreeNode]] = []

    for r in range(n_rounds):
        probs = softmax(scores)
        if not np.all(np.isfinite(probs)):
            raise ValueError(f"non-finite probabilities at round {r}")
        outputs = np.empty_like(scores)
        trees = []
        for k in range(N_CLASSES):
            g = onehot[:, k] - probs[:, k]
            h = probs[:, k] * (1.0 - probs[:, k])
            tree = grow_regression_tree(X, g, h, max_depth, min_samples_leaf)
            outputs[:, k] = tree_apply(tree, X)[:, 0]
            trees.append(tree)
        # Step-halving safeguard: never accept a loss increase.
        scale = learning_rate
        prev = trace[-1]
        new_loss = prev
        for _ in range(40):
            new_loss = _log_loss(scores + scale * outputs, labels)
            if new_loss <= prev:
                break
            scale /= 2.0
        else:
            scale = 0.0
            new_loss = prev
        scores += scale * outputs
        for tree in trees:
            scale_leaf_values(tree, scale)
        rounds.append(trees)
        trace.append(new_loss)

    return GbtModel(
        rounds=rounds,
        learning_rate=float(learning_rate),
        initial_scores=initial,
        loss_trace=trace,
        n_features=table.n_features,
    )


def gbt_decision_scores(model: GbtModel, X: np.ndarray) -> np.ndarray:
    scores = np.tile(model.initial_scores, (X.shape[0], 1))
    for trees in model.rounds:
        for k, tree in enumerate(trees):
            scores[:, k] += tree_apply(tree, X)[:, 0]
    return scores


def gbt_predict_proba(model: GbtModel, X: np.ndarray) -> np.ndarray:
    return softmax(gbt_decision_scores(model, X))
