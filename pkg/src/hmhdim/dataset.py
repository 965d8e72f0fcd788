"""Tabular dataset ingestion, stratified splits, and stratified k-fold plans.

The CSV surface is UTF-8 with a header row. A schema (JSON) maps each column
name to a role: feature_numeric, feature_boolean, feature_text_formula,
label, id, or ignore. Formula text columns are carried alongside the numeric
matrix so the feature-engineering layer can expand them.

All shuffling uses numpy's PCG64 generator with a 64-bit seed, so plans are
reproducible across runs and platforms.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CLASSES = (0, 1, 2, 3)
N_CLASSES = len(CLASSES)

ROLES = (
    "feature_numeric",
    "feature_boolean",
    "feature_text_formula",
    "label",
    "id",
    "ignore",
)

_BOOL_VALUES = {
    "true": 1.0,
    "false": 0.0,
    "1": 1.0,
    "0": 0.0,
    "yes": 1.0,
    "no": 0.0,
}


class SchemaError(ValueError):
    """Raised when a column-role schema is malformed or mismatched."""


@dataclass(frozen=True)
class DatasetTable:
    """Immutable feature matrix with class labels in {0,1,2,3}.

    ``labels`` may be None for feature-only tables (e.g. matrices built for
    prediction). ``text_columns`` carries formula strings per row for columns
    whose schema role is feature_text_formula; they are not part of ``rows``.
    """

    feature_names: tuple[str, ...]
    rows: np.ndarray
    labels: np.ndarray | None = None
    row_ids: tuple[str, ...] | None = None
    text_columns: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-D matrix")
        if rows.shape[1] != len(self.feature_names):
            raise ValueError(
                f"row width {rows.shape[1]} != {len(self.feature_names)} feature names"
            )
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature names must be unique")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (rows.shape[0],):
                raise ValueError("labels length must equal row count")
            bad = set(np.unique(labels)) - set(CLASSES)
            if bad:
                raise ValueError(f"labels outside {set(CLASSES)}: {sorted(bad)}")
            labels.flags.writeable = False
            object.__setattr__(self, "labels", labels)
        if self.row_ids is not None:
            ids = tuple(self.row_ids)
            if len(ids) != rows.shape[0]:
                raise ValueError("row_ids length must equal row count")
            object.__setattr__(self, "row_ids", ids)
        for name, col in self.text_columns.items():
            if len(col) != rows.shape[0]:
                raise ValueError(f"text column {name!r} length mismatch")

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("table has no labels")
        return self.labels

    def select_rows(self, indices) -> "DatasetTable":
        """New table holding the given rows (order preserved as given)."""
        idx = np.asarray(indices, dtype=np.int64)
        return DatasetTable(
            feature_names=self.feature_names,
            rows=self.rows[idx],
            labels=None if self.labels is None else self.labels[idx],
            row_ids=None if self.row_ids is None else tuple(self.row_ids[i] for i in idx),
            text_columns={
                name: tuple(col[i] for i in idx) for name, col in self.text_columns.items()
            },
        )

    def with_features(self, feature_names, rows) -> "DatasetTable":
        """New table with a replaced feature block, labels/ids preserved."""
        return DatasetTable(
            feature_names=tuple(feature_names),
            rows=rows,
            labels=self.labels,
            row_ids=self.row_ids,
            text_columns=dict(self.text_columns),
        )

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.feature_names.index(name)
        except ValueError:
            raise KeyError(f"no feature column named {name!r}") from None
        return self.rows[:, j]


@dataclass(frozen=True)
class SplitPlan:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int
    test_fraction: float

    def to_dict(self) -> dict:
        return {
            "train_indices": list(self.train_indices),
            "test_indices": list(self.test_indices),
            "seed": self.seed,
            "test_fraction": self.test_fraction,
        }


@dataclass(frozen=True)
class FoldPlan:
    k: int
    folds: tuple[tuple[int, ...], ...]
    seed: int

    def to_dict(self) -> dict:
        return {"k": self.k, "folds": [list(f) for f in self.folds], "seed": self.seed}


def load_schema(path) -> dict[str, str]:
    """Load and validate a column-role schema JSON file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"schema file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or not raw:
        raise SchemaError("schema must be a non-empty JSON object of column -> role")
    for col, role in raw.items():
        if role not in ROLES:
            raise SchemaError(f"column {col!r} has unknown role {role!r}")
    return dict(raw)


def validate_schema(schema: dict[str, str], require_label: bool = True) -> None:
    n_label = sum(1 for r in schema.values() if r == "label")
    if require_label and n_label != 1:
        raise SchemaError(f"schema must designate exactly one label column, found {n_label}")
    if not require_label and n_label > 1:
        raise SchemaError(f"schema designates {n_label} label columns, at most one allowed")
    n_id = sum(1 for r in schema.values() if r == "id")
    if n_id > 1:
        raise SchemaError(f"schema designates {n_id} id columns, at most one allowed")


def load_csv(path, schema: dict[str, str], require_label: bool = True) -> DatasetTable:
    """Read a descriptor or feature CSV into a DatasetTable.

    Numeric columns parse as reals, boolean columns as {0.0, 1.0}, the label
    column as a class index in {0,1,2,3}. Formula text columns are kept
    verbatim in ``text_columns``. Row order is preserved. Rows with any
    missing cell are rejected (no imputation).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"data file not found: {path}")
    validate_schema(schema, require_label=require_label)

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty, header row required") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise ValueError(f"{path}: duplicate header names: {dupes}")
        missing = sorted(set(schema) - set(header))
        if missing:
            raise SchemaError(f"{path}: schema columns absent from CSV: {missing}")

        roles = [schema.get(name, "ignore") for name in header]
        numeric_cols = [
            (j, header[j]) for j, r in enumerate(roles) if r in ("feature_numeric", "feature_boolean")
        ]
        text_cols = [(j, header[j]) for j, r in enumerate(roles) if r == "feature_text_formula"]
        label_col = next((j for j, r in enumerate(roles) if r == "label"), None)
        id_col = next((j for j, r in enumerate(roles) if r == "id"), None)

        values: list[list[float]] = []
        labels: list[int] = []
        ids: list[str] = []
        texts: dict[str, list[str]] = {name: [] for _, name in text_cols}

        for i, row in enumerate(reader):
            rownum = i + 2  # 1-based, after header
            if len(row) != len(header):
                raise ValueError(f"{path}: row {rownum} has {len(row)} cells, expected {len(header)}")
            rec = []
            for j, name in numeric_cols:
                cell = row[j].strip()
                if cell == "":
                    raise ValueError(f"{path}: row {rownum}, column {name!r}: missing value")
                if roles[j] == "feature_boolean":
                    try:
                        rec.append(_BOOL_VALUES[cell.lower()])
                    except KeyError:
                        raise ValueError(
                            f"{path}: row {rownum}, column {name!r}: "
                            f"cannot parse {cell!r} as boolean"
                        ) from None
                else:
                    try:
                        rec.append(float(cell))
                    except ValueError:
                        raise ValueError(
                            f"{path}: row {rownum}, column {name!r}: "
                            f"cannot parse {cell!r} as number"
                        ) from None
            values.append(rec)
            for j, name in text_cols:
                cell = row[j].strip()
                if cell == "":
                    raise ValueError(f"{path}: row {rownum}, column {name!r}: missing value")
                texts[name].append(cell)
            if label_col is not None:
                cell = row[label_col].strip()
                try:
                    lab = int(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: row {rownum}, label column: cannot parse {cell!r}"
                    ) from None
                if lab not in CLASSES or float(cell) != lab:
                    raise ValueError(
                        f"{path}: row {rownum}, label {cell!r} outside classes {set(CLASSES)}"
                    )
                labels.append(lab)
            if id_col is not None:
                ids.append(row[id_col].strip())

    if not values:
        raise ValueError(f"{path}: no data rows")

    return DatasetTable(
        feature_names=tuple(name for _, name in numeric_cols),
        rows=np.array(values, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64) if label_col is not None else None,
        row_ids=tuple(ids) if id_col is not None else None,
        text_columns={name: tuple(col) for name, col in texts.items()},
    )


def class_distribution(table: DatasetTable) -> dict[int, int]:
    """Per-class row counts over the full class set; absent classes map to 0."""
    counts = {c: 0 for c in CLASSES}
    if table.labels is not None:
        uniq, cnt = np.unique(table.labels, return_counts=True)
        for c, n in zip(uniq, cnt):
            counts[int(c)] = int(n)
    return counts


def _class_indices(labels: np.ndarray) -> dict[int, np.ndarray]:
    return {int(c): np.flatnonzero(labels == c) for c in np.unique(labels)}


def stratified_split(table: DatasetTable, test_fraction: float, seed: int) -> SplitPlan:
    """Class-proportional train/test split.

    Per-class test counts start at round(class_count * test_fraction) and are
    adjusted by largest/smallest fractional remainder (ties to lower class
    index) until the total equals round(n * test_fraction).
    """
    labels = table.require_labels()
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    by_class = _class_indices(labels)
    for c, idx in sorted(by_class.items()):
        if len(idx) < 2:
            raise ValueError(f"class {c} has {len(idx)} members, needs at least 2 to split")

    n = table.n_rows
    target_total = int(round(n * test_fraction))
    raw = {c: len(idx) * test_fraction for c, idx in by_class.items()}
    take = {c: int(round(raw[c])) for c in by_class}
    # Keep each class inside [0, count] before balancing the total.
    for c in take:
        take[c] = min(max(take[c], 0), len(by_class[c]))

    def remainder(c):
        return float(raw[c] - np.floor(raw[c]))

    delta = target_total - sum(take.values())
    while delta != 0:
        # One adjustment per class per pass: largest remainders gain first,
        # smallest lose first, ties to lower class index.
        if delta > 0:
            order = sorted(
                (c for c in by_class if take[c] < len(by_class[c])),
                key=lambda c: (-remainder(c), c),
            )
        else:
            order = sorted((c for c in by_class if take[c] > 0), key=lambda c: (remainder(c), c))
        if not order:
            raise ValueError("cannot satisfy test_fraction with the given class sizes")
        for c in order:
            if delta > 0 and take[c] < len(by_class[c]):
                take[c] += 1
                delta -= 1
            elif delta < 0 and take[c] > 0:
                take[c] -= 1
                delta += 1
            if delta == 0:
                break

    rng = np.random.Generator(np.random.PCG64(seed))
    test_idx: list[int] = []
    train_idx: list[int] = []
    for c in sorted(by_class):
        members = by_class[c].copy()
        rng.shuffle(members)
        test_idx.extend(int(i) for i in members[: take[c]])
        train_idx.extend(int(i) for i in members[take[c]:])
    return SplitPlan(
        train_indices=tuple(sorted(train_idx)),
        test_indices=tuple(sorted(test_idx)),
        seed=int(seed),
        test_fraction=float(test_fraction),
    )


def stratified_kfold(table: DatasetTable, k: int, seed: int) -> FoldPlan:
    """Partition rows into k folds preserving per-class balance within 1."""
    labels = table.require_labels()
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    by_class = _class_indices(labels)
    for c, idx in sorted(by_class.items()):
        if len(idx) < k:
            raise ValueError(f"class {c} has {len(idx)} members, fewer than k={k}")

    rng = np.random.Generator(np.random.PCG64(seed))
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in sorted(by_class):
        members = by_class[c].copy()
        rng.shuffle(members)
        count = len(members)
        base, extra = divmod(count, k)
        # Remainder goes to folds in ascending fold index.
        pos = 0
        for f in range(k):
            size = base + (1 if f < extra else 0)
            folds[f].extend(int(i) for i in members[pos : pos + size])
            pos += size
    return FoldPlan(
        k=int(k),
        folds=tuple(tuple(sorted(f)) for f in folds),
        seed=int(seed),
    )
