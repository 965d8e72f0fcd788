"""Bagged random forest over Gini trees."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import DatasetTable
from .tree import TreeNode, grow_gini_subsampled, tree_predict_proba


@dataclass
class ForestModel:
    trees: list[TreeNode]
    seed: int
    feature_subsample_size: int
    n_features: int
    bootstrap: bool = True


def train_random_forest(
    table: DatasetTable,
    n_trees: int = 200,
    max_depth: int | None = None,
    seed: int = 0,
    min_samples_leaf: int = 1,
    bootstrap: bool = True,
    feature_subsample_size: int | None = None,
) -> ForestModel:
    """Train ``n_trees`` Gini trees on bootstrap resamples.

    Each split considers ceil(sqrt(d)) random features unless
    ``feature_subsample_size`` overrides it. Per-tree RNG streams derive from
    the master seed, so results are reproducible and order-independent.
    """
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    labels = table.require_labels()
    d = table.n_features
    mtry = feature_subsample_size if feature_subsample_size is not None else math.ceil(math.sqrt(d))
    if not 1 <= mtry <= d:
        raise ValueError(f"feature subsample size {mtry} outside [1, {d}]")
    children = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    n = table.n_rows
    for child in children:
        rng = np.random.Generator(np.random.PCG64(child))
        if bootstrap:
            idx = rng.integers(0, n, size=n)
        else:
            idx = np.arange(n)
        trees.append(
            grow_gini_subsampled(
                table.rows[idx], labels[idx], max_depth, min_samples_leaf, mtry, rng
            )
        )
    return ForestModel(
        trees=trees,
        seed=int(seed),
        feature_subsample_size=int(mtry),
        n_features=d,
        bootstrap=bool(bootstrap),
    )


def forest_predict_proba(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Mean of per-tree leaf-ratio probabilities."""
    acc = np.zeros((X.shape[0], len(model.trees[0].value)), dtype=np.float64)
    for tree in model.trees:
        acc += tree_predict_proba(tree, X)
    return acc / len(model.trees)
