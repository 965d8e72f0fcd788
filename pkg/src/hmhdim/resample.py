"""SMOTE oversampling: equalize class counts by convex interpolation.

Each synthetic row is base + lambda * (neighbor - base) for a same-class
nearest neighbor and lambda drawn uniformly on [0, 1]. Neighbor search runs
in standardized feature space; interpolation happens in original feature
units so synthetic rows stay interpretable. Boolean indicator columns are
interpolated like reals and may come out fractional.

Generation is a single deterministic stream per seed: classes are processed
in ascending label order, and by default base rows are cycled in index order
so every real minority point seeds at least one synthetic sample once the
deficit exceeds the class size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import DatasetTable, class_distribution


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target_per_class: int | str = "auto"  # "auto" = majority class count
    seed: int = 0
    distance_space: str = "standardized_euclidean"
    # False = cycle bases in index order (default, guarantees coverage);
    # True = draw bases uniformly at random per synthetic sample.
    random_base: bool = False

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        if self.distance_space != "standardized_euclidean":
            raise ValueError(f"unsupported distance space {self.distance_space!r}")
        if self.target_per_class != "auto" and int(self.target_per_class) < 1:
            raise ValueError("target_per_class must be 'auto' or a positive integer")

    def to_dict(self) -> dict:
        return {
            "k_neighbors": self.k_neighbors,
            "target_per_class": self.target_per_class,
            "seed": self.seed,
            "distance_space": self.distance_space,
            "random_base": self.random_base,
        }


@dataclass(frozen=True)
class SyntheticSample:
    """Provenance for one synthetic row: x_new = base + lam * (nn - base)."""

    base_index: int
    neighbor_index: int
    lam: float
    features: np.ndarray = field(repr=False)
    label: int = 0

    def to_dict(self) -> dict:
        return {
            "base_index": self.base_index,
            "neighbor_index": self.neighbor_index,
            "lambda": self.lam,
            "label": self.label,
        }


def _standardized(rows: np.ndarray) -> np.ndarray:
    means = rows.mean(axis=0)
    stds = rows.std(axis=0)
    safe = np.where(stds > 0.0, stds, 1.0)
    z = (rows - means) / safe
    z[:, stds == 0.0] = 0.0
    return z


def knn_within_class(table: DatasetTable, cls: int, k: int) -> dict[int, list[int]]:
    """k nearest same-class neighbors per member, standardized Euclidean.

    A point is never its own neighbor; distance ties break toward the lower
    row index. Keys and neighbor values are row indices into ``table``.
    """
    labels = table.require_labels()
    members = np.flatnonzero(labels == cls)
    if len(members) == 0:
        raise ValueError(f"class {cls} has no members")
    if len(members) < k + 1:
        raise ValueError(
            f"class {cls} has {len(members)} members, needs at least {k + 1} for k={k}"
        )
    z = _standardized(table.rows)[members]
    # Pairwise squared distances within the class.
    sq = np.sum(z * z, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (z @ z.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)
    out: dict[int, list[int]] = {}
    for i, row_idx in enumerate(members):
        # Stable argsort on distance keeps lower member index first on ties;
        # members[] is ascending so member order equals row-index order.
        order = np.argsort(d2[i], kind="stable")[:k]
        out[int(row_idx)] = [int(members[j]) for j in order]
    return out


def smote(table: DatasetTable, config: SmoteConfig) -> tuple[DatasetTable, list[SyntheticSample]]:
    """Oversample minority classes until every class hits the target count.

    Original rows are preserved verbatim and come first in the output, in
    their original order; synthetic rows follow in generation order. Returns
    the augmented table and per-row provenance (base index, neighbor index,
    lambda, all indices into the input table).
    """
    labels = table.require_labels()
    counts = {c: n for c, n in class_distribution(table).items() if n > 0}
    if not counts:
        raise ValueError("table has no labeled rows")
    if config.target_per_class == "auto":
        target = max(counts.values())
    else:
        target = int(config.target_per_class)
    below = {c: n for c, n in counts.items() if n < target}
    for c, n in sorted(counts.items()):
        if n > target:
            raise ValueError(
                f"target {target} is below existing count {n} for class {c} "
                "(oversampling only, the majority class is never reduced)"
            )
    for c in sorted(below):
        if counts[c] < config.k_neighbors + 1:
            raise ValueError(
                f"class {c} has {counts[c]} members, needs at least "
                f"{config.k_neighbors + 1} for k={config.k_neighbors}"
            )

    rng = np.random.Generator(np.random.PCG64(config.seed))
    synth_rows: list[np.ndarray] = []
    synth_labels: list[int] = []
    provenance: list[SyntheticSample] = []
    for c in sorted(below):
        need = target - counts[c]
        neighbors = knn_within_class(table, c, config.k_neighbors)
        members = sorted(neighbors)
        made = 0
        while made < need:
            if config.random_base:
                bases = rng.choice(members, size=min(need - made, len(members)), replace=True)
            else:
                bases = members[: need - made] if need - made < len(members) else members
            for base in bases:
                nn = neighbors[int(base)][rng.integers(0, config.k_neighbors)]
                lam = float(rng.uniform(0.0, 1.0))
                x_base = table.rows[base]
                x_new = x_base + lam * (table.rows[nn] - x_base)
                synth_rows.append(x_new)
                synth_labels.append(c)
                provenance.append(
                    SyntheticSample(
                        base_index=int(base),
                        neighbor_index=int(nn),
                        lam=lam,
                        features=x_new,
                        label=int(c),
                    )
                )
                made += 1

    if synth_rows:
        rows = np.vstack([table.rows, np.array(synth_rows)])
        new_labels = np.concatenate([labels, np.array(synth_labels, dtype=np.int64)])
    else:
        rows = table.rows
        new_labels = labels
    row_ids = None
    if table.row_ids is not None:
        row_ids = list(table.row_ids) + [
            f"synthetic-{s.label}-{i}" for i, s in enumerate(provenance)
        ]
    augmented = DatasetTable(
        feature_names=table.feature_names,
        rows=rows,
        labels=new_labels,
        row_ids=tuple(row_ids) if row_ids is not None else None,
    )
    return augmented, provenance
