"""Multinomial logistic regression and one-vs-rest linear SVM.

Both train by deterministic full-batch descent with a backtracking step:
logistic uses an Armijo condition on the smooth cross-entropy objective, the
SVM accepts any strict decrease of the nonsmooth hinge objective, so the
recorded objective trace is non-increasing by construction for both.

Features should be standardized before training; the trainers do not rescale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import DatasetTable, N_CLASSES


@dataclass
class LinearModel:
    weights: np.ndarray  # (n_classes, n_features)
    biases: np.ndarray  # (n_classes,)
    regularization: float
    kind: str  # "softmax_logistic" | "ovr_hinge_svm"
    converged: bool = False
    n_iter: int = 0
    objective_trace: list[float] = field(default_factory=list, repr=False)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights.T + self.biases


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def logistic_objective(weights, biases, X, labels, l2):
    """Mean cross-entropy + (l2/2)||W||^2; returns (loss, grad_w, grad_b).

    Biases are unregularized.
    """
    n = X.shape[0]
    scores = X @ weights.T + biases
    z = scores - scores.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1)) + scores.max(axis=1)
    loss = float(np.mean(logsumexp - scores[np.arange(n), labels]))
    loss += 0.5 * l2 * float(np.sum(weights * weights))
    probs = softmax(scores)
    probs[np.arange(n), labels] -= 1.0
    grad_w = probs.T @ X / n + l2 * weights
    grad_b = probs.sum(axis=0) / n
    return loss, grad_w, grad_b


def svm_objective(weights, biases, X, labels, c):
    """Sum over one-vs-rest problems of mean hinge + (1/(2c))||w_k||^2.

    Returns (loss, subgrad_w, subgrad_b); samples exactly on the margin
    contribute nothing to the subgradient (a valid subgradient choice).
    """
    n = X.shape[0]
    lam = 1.0 / c
    scores = X @ weights.T + biases
    t = np.where(labels[:, None] == np.arange(weights.shape[0])[None, :], 1.0, -1.0)
    margins = t * scores
    hinge = np.maximum(0.0, 1.0 - margins)
    loss = float(hinge.mean(axis=0).sum())
    loss += 0.5 * lam * float(np.sum(weights * weights))
    active = (margins < 1.0).astype(np.float64) * t
    grad_w = -(active.T @ X) / n + lam * weights
    grad_b = -active.sum(axis=0) / n
    return loss, grad_w, grad_b


def _descend(objective, w0, b0, max_iters, tol, armijo):
    """Backtracking descent; returns (w, b, converged, n_iter, trace)."""
    w, b = w0, b0
    loss, gw, gb = objective(w, b)
    trace = [loss]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        gmax = max(np.abs(gw).max(), np.abs(gb).max())
        if gmax < tol:
            converged = True
            break
        gsq = float(np.sum(gw * gw) + np.sum(gb * gb))
        step = min(step * 2.0, 1e3)
        moved = False
        while step > 1e-20:
            w_try = w - step * gw
            b_try = b - step * gb
            loss_try, gw_try, gb_try = objective(w_try, b_try)
            if not np.isfinite(loss_try):
                raise ValueError(f"non-finite loss at iteration {it}")
            accept = loss_try <= loss - 1e-4 * step * gsq if armijo else loss_try < loss
            if accept:
                w, b, loss, gw, gb = w_try, b_try, loss_try, gw_try, gb_try
                trace.append(loss)
                moved = True
                break
            step /= 2.0
        if not moved:
            break
    return w, b, converged, it, trace


def train_logistic(
    table: DatasetTable,
    l2: float = 1.0,
    max_iters: int = 500,
    tolerance: float = 1e-6,
) -> LinearModel:
    """Minimize multinomial cross-entropy + (l2/2)||W||^2 by descent."""
    labels = table.require_labels()
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    present = np.unique(labels)
    if len(present) < 2:
        raise ValueError("needs >= 2 classes")
    d = table.n_features
    # Classes absent from the data keep weights 0 and a large negative bias
    # (the maximum-likelihood limit); their gradients are masked out so the
    # convergence check covers only trainable parameters.
    mask = np.zeros(N_CLASSES, dtype=bool)
    mask[present] = True
    w0 = np.zeros((N_CLASSES, d))
    b0 = np.where(mask, 0.0, -30.0)

    def obj(w, b):
        loss, gw, gb = logistic_objective(w, b, table.rows, labels, l2)
        gw[~mask] = 0.0
        gb[~mask] = 0.0
        return loss, gw, gb

    w, b, converged, it, trace = _descend(obj, w0, b0, max_iters, tolerance, armijo=True)
    return LinearModel(
        weights=w,
        biases=b,
        regularization=float(l2),
        kind="softmax_logistic",
        converged=converged,
        n_iter=it,
        objective_trace=trace,
    )


def train_svm(
    table: DatasetTable,
    c: float = 1.0,
    max_iters: int = 500,
    seed: int = 0,
    tolerance: float = 1e-6,
) -> LinearModel:
    """One-vs-rest hinge + L2 by monotone full-batch subgradient descent.

    ``seed`` is accepted for trainer-interface parity; the optimizer is
    fully deterministic and does not consume randomness.
    """
    labels = table.require_labels()
    if c <= 0:
        raise ValueError(f"c must be > 0, got {c}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if len(np.unique(labels)) < 2:
        raise ValueError("needs >= 2 classes")
    d = table.n_features
    w0 = np.zeros((N_CLASSES, d))
    b0 = np.zeros(N_CLASSES)

    def obj(w, b):
        return svm_objective(w, b, table.rows, labels, c)

    w, b, converged, it, trace = _descend(obj, w0, b0, max_iters, tolerance, armijo=False)
    return LinearModel(
        weights=w,
        biases=b,
        regularization=float(c),
        kind="ovr_hinge_svm",
        converged=converged,
        n_iter=it,
        objective_trace=trace,
    )


def linear_predict_proba(model: LinearModel, X: np.ndarray) -> np.ndarray:
    """Softmax over decision scores.

    For the SVM this is a fixed calibration convention over margins, not a
    fitted probability model.
    """
    return softmax(model.decision_scores(X))
