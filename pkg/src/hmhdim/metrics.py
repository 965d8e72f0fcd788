"""Evaluation suite: confusion matrix, per-class P/R/F1, one-vs-rest ROC/AUC.

Zero-denominator precision/recall/F1 evaluate to 0 and the affected class and
metric are flagged in the report rather than raising. Macro (unweighted) F1
is the headline aggregate, since minority-class behavior is the point of the
whole pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ClassReport:
    classes: tuple[int, ...]
    precision: dict[int, float]
    recall: dict[int, float]
    f1: dict[int, float]
    support: dict[int, int]
    macro_f1: float
    accuracy: float
    confusion: np.ndarray = field(repr=False)  # rows true, cols predicted
    zero_division_flags: tuple[tuple[int, str], ...] = ()

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "precision": {str(c): self.precision[c] for c in self.classes},
            "recall": {str(c): self.recall[c] for c in self.classes},
            "f1": {str(c): self.f1[c] for c in self.classes},
            "support": {str(c): self.support[c] for c in self.classes},
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "confusion": [[int(v) for v in row] for row in self.confusion],
            "zero_division_flags": [[c, m] for c, m in self.zero_division_flags],
        }


@dataclass(frozen=True)
class RocCurve:
    cls: int
    points: tuple[tuple[float, float], ...]  # (fpr, tpr) from (0,0) to (1,1)
    thresholds: tuple[float, ...]  # descending; leading +inf for (0,0)
    auc: float

    def to_dict(self) -> dict:
        return {
            "class": self.cls,
            "points": [[x, y] for x, y in self.points],
            "thresholds": ["inf" if np.isinf(t) else t for t in self.thresholds],
            "auc": self.auc,
        }


def classification_report(true_labels, predicted_labels) -> ClassReport:
    """Per-class precision/recall/F1 with support, macro F1, and accuracy."""
    y_true = np.asarray(true_labels, dtype=np.int64)
    y_pred = np.asarray(predicted_labels, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape[0]} true vs {y_pred.shape[0]} predicted")
    n = y_true.shape[0]
    if n == 0:
        raise ValueError("empty input")
    classes = tuple(sorted(set(y_true.tolist()) | set(y_pred.tolist())))
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        confusion[index[t], index[p]] += 1

    precision, recall, f1, support = {}, {}, {}, {}
    flags = []
    for c in classes:
        i = index[c]
        tp = int(confusion[i, i])
        fp = int(confusion[:, i].sum()) - tp
        fn = int(confusion[i, :].sum()) - tp
        if tp + fp > 0:
            precision[c] = tp / (tp + fp)
        else:
            precision[c] = 0.0
            flags.append((c, "precision"))
        if tp + fn > 0:
            recall[c] = tp / (tp + fn)
        else:
            recall[c] = 0.0
            flags.append((c, "recall"))
        if precision[c] + recall[c] > 0:
            f1[c] = 2.0 * precision[c] * recall[c] / (precision[c] + recall[c])
        else:
            f1[c] = 0.0
            flags.append((c, "f1"))
        support[c] = tp + fn
    return ClassReport(
        classes=classes,
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        macro_f1=float(np.mean([f1[c] for c in classes])),
        accuracy=float(np.trace(confusion) / n),
        confusion=confusion,
        zero_division_flags=tuple(flags),
    )


def roc_curve_ovr(true_labels, scores, cls: int) -> RocCurve:
    """One-vs-rest ROC for one class from probability vectors.

    Thresholds sweep the unique class scores in descending order; tied
    scores collapse to a single point. AUC is the trapezoid integral.
    """
    y_true = np.asarray(true_labels, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2:
        raise ValueError("scores must be a matrix of per-sample probability vectors")
    if s.shape[0] != y_true.shape[0]:
        raise ValueError("scores and labels length mismatch")
    if np.any(s < -1e-9) or np.any(np.abs(s.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("scores must be valid probability vectors")
    if cls not in y_true:
        raise ValueError(f"class {cls} absent from true labels")
    pos = y_true == cls
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_neg == 0:
        raise ValueError("all labels belong to the positive class, ROC undefined")

    if not 0 <= cls < s.shape[1]:
        raise ValueError(f"class {cls} outside score matrix with {s.shape[1]} columns")
    col = s[:, cls]
    order = np.argsort(-col, kind="stable")
    sorted_scores = col[order]
    sorted_pos = pos[order].astype(np.int64)
    tp_cum = np.cumsum(sorted_pos)
    fp_cum = np.cumsum(1 - sorted_pos)
    # Keep only the last index of each tied-score run.
    distinct = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    cut = np.append(distinct, len(sorted_scores) - 1)
    tpr = np.concatenate([[0.0], tp_cum[cut] / n_pos])
    fpr = np.concatenate([[0.0], fp_cum[cut] / n_neg])
    thresholds = np.concatenate([[np.inf], sorted_scores[cut]])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(
        cls=int(cls),
        points=tuple((float(x), float(y)) for x, y in zip(fpr, tpr)),
        thresholds=tuple(float(t) for t in thresholds),
        auc=auc,
    )


def auc_summary(curves) -> dict[int, float]:
    """Map class -> AUC for a collection of ROC curves."""
    curves = list(curves)
    if not curves:
        raise ValueError("no curves given")
    return {curve.cls: curve.auc for curve in curves}
