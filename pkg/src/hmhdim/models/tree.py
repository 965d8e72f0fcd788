"""CART decision trees: Gini classification and squared-error regression.

Candidate thresholds are midpoints between consecutive sorted unique feature
values, so an exhaustive search over midpoints finds exactly the same split
set. Equal-gain ties break toward the lowest feature index, then the lowest
threshold. Regression trees carry Newton leaf values (sum of gradients over
sum of hessians) for use inside boosting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import DatasetTable, N_CLASSES

# Regression leaf values are clipped to this magnitude; huge Newton steps
# from near-zero hessians would otherwise destabilize boosting.
LEAF_VALUE_CLIP = 10.0


@dataclass
class TreeNode:
    """One tree node; ``feature_index`` None marks a leaf.

    ``value`` holds per-class sample counts for classification trees and a
    single-element array (the leaf score) for regression trees. ``gain`` is
    the impurity decrease achieved by this node's split, weighted later by
    node size for importance accounting.
    """

    value: np.ndarray
    n_samples: int
    gain: float = 0.0
    feature_index: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    n_features: int = 0  # set on the root by trainers

    @property
    def is_leaf(self) -> bool:
        return self.feature_index is None


def _gini(counts: np.ndarray, n: float) -> float:
    p = counts / n
    return float(1.0 - np.sum(p * p))


def _best_split_gini(X, onehot, total_counts, parent_gini, allowed, min_samples_leaf):
    """Best (gain, feature, threshold) over midpoint candidates, or None."""
    n = X.shape[0]
    best_gain = 0.0
    best = None
    for f in allowed:
        xcol = X[:, f]
        order = np.argsort(xcol, kind="stable")
        xs = xcol[order]
        if xs[0] == xs[-1]:
            continue
        cum = np.cumsum(onehot[order], axis=0)
        n_left = np.arange(1, n)
        boundary = xs[:-1] != xs[1:]
        valid = boundary & (n_left >= min_samples_leaf) & ((n - n_left) >= min_samples_leaf)
        if not np.any(valid):
            continue
        left = cum[:-1][valid].astype(np.float64)
        nl = n_left[valid].astype(np.float64)
        nr = n - nl
        right = total_counts - left
        gini_l = 1.0 - np.sum((left / nl[:, None]) ** 2, axis=1)
        gini_r = 1.0 - np.sum((right / nr[:, None]) ** 2, axis=1)
        gains = parent_gini - (nl * gini_l + nr * gini_r) / n
        j = int(np.argmax(gains))  # first max: lowest threshold on ties
        if gains[j] > best_gain:
            pos = np.flatnonzero(valid)[j]
            best_gain = float(gains[j])
            best = (best_gain, int(f), float((xs[pos] + xs[pos + 1]) / 2.0))
    return best


def _grow_gini(X, onehot, depth_left, min_samples_leaf, fixed_allowed, mtry, rng):
    n = X.shape[0]
    counts = onehot.sum(axis=0).astype(np.float64)
    node = TreeNode(value=counts, n_samples=n)
    parent_gini = _gini(counts, n)
    if parent_gini == 0.0 or (depth_left is not None and depth_left <= 0) or n < 2 * min_samples_leaf:
        return node
    d = X.shape[1]
    if fixed_allowed is not None:
        allowed = fixed_allowed
    elif mtry is not None and mtry < d:
        allowed = np.sort(rng.choice(d, size=mtry, replace=False))
    else:
        allowed = np.arange(d)
    found = _best_split_gini(X, onehot, counts, parent_gini, allowed, min_samples_leaf)
    if found is None:
        return node
    gain, f, thr = found
    mask = X[:, f] <= thr
    next_depth = None if depth_left is None else depth_left - 1
    node.gain = gain
    node.feature_index = f
    node.threshold = thr
    node.left = _grow_gini(X[mask], onehot[mask], next_depth, min_samples_leaf, fixed_allowed, mtry, rng)
    node.right = _grow_gini(X[~mask], onehot[~mask], next_depth, min_samples_leaf, fixed_allowed, mtry, rng)
    return node


def train_tree(
    table: DatasetTable,
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
    feature_subset: np.ndarray | None = None,
) -> TreeNode:
    """Fit a Gini classification tree; leaves store per-class counts.

    ``max_depth`` None means unlimited. ``feature_subset`` restricts every
    split to the given feature indices (used for ablations; per-split random
    subsetting lives in the forest trainer).
    """
    labels = table.require_labels()
    if table.n_rows < 1:
        raise ValueError("empty table")
    if max_depth is not None and max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    if min_samples_leaf < 1:
        raise ValueError(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")
    onehot = np.zeros((table.n_rows, N_CLASSES), dtype=np.int64)
    onehot[np.arange(table.n_rows), labels] = 1
    fixed = None if feature_subset is None else np.asarray(feature_subset, dtype=np.int64)
    root = _grow_gini(table.rows, onehot, max_depth, min_samples_leaf, fixed, None, None)
    root.n_features = table.n_features
    return root


def grow_gini_subsampled(X, labels, max_depth, min_samples_leaf, mtry, rng) -> TreeNode:
    """Gini tree drawing ``mtry`` random candidate features per split."""
    onehot = np.zeros((X.shape[0], N_CLASSES), dtype=np.int64)
    onehot[np.arange(X.shape[0]), labels] = 1
    root = _grow_gini(X, onehot, max_depth, min_samples_leaf, None, mtry, rng)
    root.n_features = X.shape[1]
    return root


def _best_split_sse(X, g, allowed, min_samples_leaf):
    """Best variance-reduction split for regression targets g."""
    n = X.shape[0]
    total = float(g.sum())
    parent_score = total * total / n
    best_gain = 0.0
    best = None
    for f in allowed:
        xcol = X[:, f]
        order = np.argsort(xcol, kind="stable")
        xs = xcol[order]
        if xs[0] == xs[-1]:
            continue
        cum = np.cumsum(g[order])
        n_left = np.arange(1, n)
        boundary = xs[:-1] != xs[1:]
        valid = boundary & (n_left >= min_samples_leaf) & ((n - n_left) >= min_samples_leaf)
        if not np.any(valid):
            continue
        gl = cum[:-1][valid]
        nl = n_left[valid].astype(np.float64)
        gr = total - gl
        nr = n - nl
        # SSE reduction: sum-of-squares terms cancel, leaving the mean terms.
        gains = gl * gl / nl + gr * gr / nr - parent_score
        j = int(np.argmax(gains))
        if gains[j] > best_gain + 1e-12:
            pos = np.flatnonzero(valid)[j]
            best_gain = float(gains[j])
            best = (best_gain, int(f), float((xs[pos] + xs[pos + 1]) / 2.0))
    return best


def grow_regression_tree(
    X: np.ndarray,
    gradients: np.ndarray,
    hessians: np.ndarray,
    max_depth: int | None,
    min_samples_leaf: int,
) -> TreeNode:
    """Squared-error tree on gradients with Newton leaf values g_sum/h_sum."""
    n = X.shape[0]
    node = TreeNode(value=_newton_value(gradients, hessians), n_samples=n)
    if (max_depth is not None and max_depth <= 0) or n < 2 * min_samples_leaf:
        return node
    found = _best_split_sse(X, gradients, np.arange(X.shape[1]), min_samples_leaf)
    if found is None:
        return node
    gain, f, thr = found
    mask = X[:, f] <= thr
    next_depth = None if max_depth is None else max_depth - 1
    node.gain = gain / n  # per-sample scale, comparable across nodes
    node.feature_index = f
    node.threshold = thr
    node.left = grow_regression_tree(
        X[mask], gradients[mask], hessians[mask], next_depth, min_samples_leaf
    )
    node.right = grow_regression_tree(
        X[~mask], gradients[~mask], hessians[~mask], next_depth, min_samples_leaf
    )
    return node


def _newton_value(g, h) -> np.ndarray:
    v = float(g.sum() / (h.sum() + 1e-16))
    return np.array([np.clip(v, -LEAF_VALUE_CLIP, LEAF_VALUE_CLIP)])


def tree_apply(root: TreeNode, X: np.ndarray) -> np.ndarray:
    """Per-row leaf values, shape (n, value_dim)."""
    out = np.empty((X.shape[0], len(root.value)), dtype=np.float64)
    _descend(root, X, np.arange(X.shape[0]), out)
    return out


def _descend(node: TreeNode, X, idx, out):
    if node.is_leaf:
        out[idx] = node.value
        return
    mask = X[idx, node.feature_index] <= node.threshold
    _descend(node.left, X, idx[mask], out)
    _descend(node.right, X, idx[~mask], out)


def tree_predict_proba(root: TreeNode, X: np.ndarray) -> np.ndarray:
    """Leaf class-count ratios as probabilities."""
    counts = tree_apply(root, X)
    return counts / counts.sum(axis=1, keepdims=True)


def iter_nodes(root: TreeNode):
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if not node.is_leaf:
            stack.append(node.right)
            stack.append(node.left)


def scale_leaf_values(root: TreeNode, scale: float) -> None:
    for node in iter_nodes(root):
        if node.is_leaf:
            node.value = node.value * scale
