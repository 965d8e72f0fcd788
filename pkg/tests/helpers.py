"""Shared test utilities: synthetic descriptor datasets and CSV scaffolding.

The synthetic generator mimics a hybrid-metal-halide descriptor export with
four dimensionality classes. Class profiles deliberately overlap on integer
descriptor cells (class 0 collides with classes 1/3 and, via contamination,
with class 2), so minority-class performance is genuinely limited before
oversampling and improves once the training distribution is balanced.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from hmhdim.dataset import DatasetTable, load_csv

DESCRIPTOR_SCHEMA = {
    "id": "id",
    "organic_formula": "feature_text_formula",
    "inorganic_formula": "feature_text_formula",
    "num_cation_rings": "feature_numeric",
    "ring_c_count": "feature_numeric",
    "ring_non_c_count": "feature_numeric",
    "longest_alkyl_chain": "feature_numeric",
    "num_alkyl_chains": "feature_numeric",
    "water_present": "feature_boolean",
    "terminal_nitrogens": "feature_numeric",
    "longest_chain_c_count": "feature_numeric",
    "num_same_cations": "feature_numeric",
    "dimensionality": "label",
}

PAPER_PROFILE_COUNTS = {0: 25, 1: 49, 2: 334, 3: 86}  # sums to 494, majority 334
PAPER_FRACTION_COUNTS = {0: 25, 1: 49, 2: 331, 3: 89}  # 5/10/67/18 percent of 494


def _format_formula(c=0, h=0, n=0, o=0) -> str:
    parts = []
    for sym, cnt in (("C", c), ("H", h), ("N", n), ("O", o)):
        if cnt == 1:
            parts.append(sym)
        elif cnt > 1:
            parts.append(f"{sym}{cnt}")
    return "".join(parts) or "H"


def _cation_formula(rec: dict) -> str:
    ring_c = rec["ring_c_count"]
    chain_c = rec["longest_chain_c_count"]
    c = ring_c + chain_c + rec["_extra_c"]
    n = rec["terminal_nitrogens"] + rec["ring_non_c_count"]
    h = max(2 * c + rec["terminal_nitrogens"] + rec["_extra_h"], 1)
    return _format_formula(c=c, h=h, n=n)


def _base_record(rng, rings, chain, term_n, halides, p_water):
    ring_c = int(rings * rng.integers(4, 7)) if rings else 0
    ring_non_c = int(rings * rng.integers(0, 3)) if rings else 0
    chain_c = int(max(chain - rng.integers(0, 2), 0))
    metal = rng.choice(["Pb", "Sn", "Ge"], p=[0.6, 0.3, 0.1])
    hal = rng.choice(["I", "Br", "Cl"], p=[0.6, 0.3, 0.1])
    return {
        "num_cation_rings": int(rings),
        "ring_c_count": ring_c,
        "ring_non_c_count": ring_non_c,
        "longest_alkyl_chain": int(chain),
        "num_alkyl_chains": 0 if chain == 0 else int(rng.integers(1, 3)),
        "water_present": bool(rng.random() < p_water),
        "terminal_nitrogens": int(term_n),
        "longest_chain_c_count": chain_c,
        "num_same_cations": int(rng.integers(1, 3)),
        "inorganic_formula": f"{metal}{hal}{halides}",
        "_extra_c": int(rng.integers(0, 3)),
        "_extra_h": int(rng.integers(0, 4)),
    }


def _profile(rng, cls):
    if cls == 0:  # isolated units: compact polar cations
        return _base_record(
            rng,
            rings=int(rng.integers(0, 3)),
            chain=int(rng.integers(0, 4)),
            term_n=int(rng.integers(2, 4)),
            halides=int(rng.integers(4, 6)),
            p_water=0.30,
        )
    if cls == 1:  # chains
        return _base_record(
            rng,
            rings=int(rng.integers(0, 3)),
            chain=int(rng.integers(1, 6)),
            term_n=int(rng.integers(1, 4)),
            halides=int(rng.integers(4, 6)),
            p_water=0.15,
        )
    if cls == 2:  # sheets: long-tail cations
        return _base_record(
            rng,
            rings=int(rng.integers(0, 2)),
            chain=int(rng.integers(4, 13)),
            term_n=int(rng.integers(1, 3)),
            halides=4,
            p_water=0.05,
        )
    return _base_record(  # bulk network: small cations
        rng,
        rings=0,
        chain=int(rng.integers(0, 3)),
        term_n=int(rng.integers(1, 3)),
        halides=int(rng.integers(3, 5)),
        p_water=0.02,
    )


# Fraction of each class drawn from another class's profile (irreducible
# cell-level overlap): class -> (confuser class, probability).
DEFAULT_CONTAMINATION = {0: (2, 0.30), 1: (2, 0.15), 2: (0, 0.05), 3: (0, 0.10)}


def make_descriptor_rows(
    counts: dict[int, int],
    seed: int = 0,
    contamination: dict[int, tuple[int, float]] | None = None,
) -> list[dict]:
    """Synthetic descriptor rows (dicts matching DESCRIPTOR_SCHEMA columns)."""
    rng = np.random.default_rng(seed)
    contamination = DEFAULT_CONTAMINATION if contamination is None else contamination
    rows = []
    for cls in sorted(counts):
        for _ in range(counts[cls]):
            source = cls
            if cls in contamination and rng.random() < contamination[cls][1]:
                source = contamination[cls][0]
            rec = _profile(rng, source)
            rec["organic_formula"] = _cation_formula(rec)
            rec.pop("_extra_c")
            rec.pop("_extra_h")
            rec["dimensionality"] = cls
            rows.append(rec)
    for i, rec in enumerate(rows):
        rec["id"] = f"hmh-{i:04d}"
    return rows


def write_descriptor_csv(rows: list[dict], path) -> Path:
    path = Path(path)
    cols = list(DESCRIPTOR_SCHEMA)
    lines = [",".join(cols)]
    for rec in rows:
        cells = []
        for col in cols:
            v = rec[col]
            if isinstance(v, bool):
                cells.append("true" if v else "false")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_descriptor_schema(path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(DESCRIPTOR_SCHEMA, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def make_descriptor_dataset(tmpdir, counts=None, seed: int = 0) -> tuple[Path, Path]:
    """Write a descriptor CSV + schema into tmpdir, return their paths."""
    counts = counts or PAPER_PROFILE_COUNTS
    rows = make_descriptor_rows(counts, seed=seed)
    data = write_descriptor_csv(rows, Path(tmpdir) / "descriptors.csv")
    schema = write_descriptor_schema(Path(tmpdir) / "schema.json")
    return data, schema


def load_descriptor_table(tmpdir, counts=None, seed: int = 0) -> DatasetTable:
    data, _ = make_descriptor_dataset(tmpdir, counts=counts, seed=seed)
    return load_csv(data, DESCRIPTOR_SCHEMA)


def random_table(n: int, d: int, seed: int, n_classes: int = 4, informative: bool = False) -> DatasetTable:
    """Random numeric table with labels over the first ``n_classes`` classes."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    if informative:
        labels = rng.integers(0, n_classes, size=n)
        X[:, 0] += labels * 1.5
    else:
        labels = rng.integers(0, n_classes, size=n)
    return DatasetTable(
        feature_names=tuple(f"f{i}" for i in range(d)),
        rows=X,
        labels=labels.astype(np.int64),
    )
