"""Descriptor validation, interaction feature construction, standardization.

Eleven original descriptors per compound: the organic and inorganic formula
strings plus nine integer/boolean structure counts. The formula strings are
expanded into numeric composition features and the whole set is optionally
extended with nine named interaction features (products, ratios, and sums of
originals). Every output column is listed in the feature manifest together
with its defining formula and provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .dataset import DatasetTable
from .formula import MassTable, composition_features, parse_formula

# Mass of one CH2 chain unit, used as the alkyl weight proxy.
CH2_UNIT_MASS = 14.027

# Canonical descriptor CSV column names, in matrix order.
NUMERIC_DESCRIPTORS = (
    "num_cation_rings",
    "ring_c_count",
    "ring_non_c_count",
    "longest_alkyl_chain",
    "num_alkyl_chains",
    "water_present",
    "terminal_nitrogens",
    "longest_chain_c_count",
    "num_same_cations",
)
FORMULA_DESCRIPTORS = ("organic_formula", "inorganic_formula")

COMPOSITION_FEATURES = (
    "organic_c_count",
    "organic_h_count",
    "organic_n_count",
    "organic_o_count",
    "organic_heavy_atoms",
    "organic_mol_weight",
    "inorganic_b_site_count",
    "inorganic_halide_count",
    "halide_metal_ratio",
    "inorganic_mol_weight",
)

INTERACTION_FEATURES = (
    "total_alkyl_chain_weight",
    "ring_length_interaction",
    "terminal_n_per_chain",
    "mw_per_chain_length",
    "cation_complexity",
    "nitrogen_weight_ratio",
    "compactness",
    "hydrophilicity_index",
    "size_complexity",
)

# Human-readable defining formulas, emitted in the manifest.
_FORMULAS = {
    "total_alkyl_chain_weight": "num_alkyl_chains * longest_chain_c_count * 14.027",
    "ring_length_interaction": "num_cation_rings * longest_alkyl_chain",
    "terminal_n_per_chain": "terminal_nitrogens / (longest_chain_c_count + 1)",
    "mw_per_chain_length": "organic_mol_weight / (longest_chain_c_count + 1)",
    "cation_complexity": "num_cation_rings + num_alkyl_chains + terminal_nitrogens",
    "nitrogen_weight_ratio": "organic_n_count * mass(N) / organic_mol_weight",
    "compactness": "(ring_c_count + ring_non_c_count) / max(1, organic_heavy_atoms)",
    "hydrophilicity_index": "(terminal_nitrogens + water_present) / (longest_chain_c_count + 1)",
    "size_complexity": "organic_heavy_atoms * num_same_cations",
}


@dataclass(frozen=True)
class DescriptorRecord:
    """The eleven original descriptors for one compound."""

    organic_formula: str
    inorganic_formula: str
    num_cation_rings: int
    ring_c_count: int
    ring_non_c_count: int
    longest_alkyl_chain: int
    num_alkyl_chains: int
    water_present: bool
    terminal_nitrogens: int
    longest_chain_c_count: int
    num_same_cations: int

    def validate(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type in ("int",) and v < 0:
                raise ValueError(f"{f.name} must be non-negative, got {v}")
        if self.num_same_cations < 1:
            raise ValueError(f"num_same_cations must be >= 1, got {self.num_same_cations}")
        if self.num_cation_rings == 0 and (self.ring_c_count + self.ring_non_c_count) != 0:
            raise ValueError("ring atom counts must be 0 when num_cation_rings is 0")
        if self.longest_chain_c_count > self.longest_alkyl_chain:
            raise ValueError(
                f"longest_chain_c_count {self.longest_chain_c_count} exceeds "
                f"longest_alkyl_chain {self.longest_alkyl_chain}"
            )
        if not self.organic_formula.strip() or not self.inorganic_formula.strip():
            raise ValueError("formula strings must be non-empty")


def engineer_features(
    record: DescriptorRecord,
    comp_features: dict[str, float],
    masses: MassTable | None = None,
) -> dict[str, float]:
    """The nine named interaction features; every value is finite.

    ``comp_features`` must carry organic_mol_weight, organic_n_count, and
    organic_heavy_atoms (as produced by composition_features). Denominators
    are guarded so no record can yield a non-finite value.
    """
    masses = masses or MassTable.default()
    mw = comp_features["organic_mol_weight"]
    n_count = comp_features["organic_n_count"]
    heavy = comp_features["organic_heavy_atoms"]
    chain_plus1 = record.longest_chain_c_count + 1
    out = {
        "total_alkyl_chain_weight": record.num_alkyl_chains
        * record.longest_chain_c_count
        * CH2_UNIT_MASS,
        "ring_length_interaction": float(record.num_cation_rings * record.longest_alkyl_chain),
        "terminal_n_per_chain": record.terminal_nitrogens / chain_plus1,
        "mw_per_chain_length": mw / chain_plus1,
        "cation_complexity": float(
            record.num_cation_rings + record.num_alkyl_chains + record.terminal_nitrogens
        ),
        "nitrogen_weight_ratio": (n_count * masses.masses["N"]) / mw,
        "compactness": (record.ring_c_count + record.ring_non_c_count) / max(1.0, heavy),
        "hydrophilicity_index": (record.terminal_nitrogens + int(record.water_present))
        / chain_plus1,
        "size_complexity": heavy * record.num_same_cations,
    }
    for name, v in out.items():
        if not np.isfinite(v):
            raise AssertionError(f"engineered feature {name} is not finite")
    return out


def records_from_table(table: DatasetTable) -> list[DescriptorRecord]:
    """Build DescriptorRecords from a table loaded off a descriptor CSV.

    Requires the canonical descriptor column names: the two formula text
    columns plus the nine numeric descriptor columns.
    """
    missing = [c for c in FORMULA_DESCRIPTORS if c not in table.text_columns]
    missing += [c for c in NUMERIC_DESCRIPTORS if c not in table.feature_names]
    if missing:
        raise ValueError(f"descriptor columns missing from table: {missing}")
    records = []
    for i in range(table.n_rows):
        vals = {name: table.column(name)[i] for name in NUMERIC_DESCRIPTORS}
        rec = DescriptorRecord(
            organic_formula=table.text_columns["organic_formula"][i],
            inorganic_formula=table.text_columns["inorganic_formula"][i],
            num_cation_rings=int(vals["num_cation_rings"]),
            ring_c_count=int(vals["ring_c_count"]),
            ring_non_c_count=int(vals["ring_non_c_count"]),
            longest_alkyl_chain=int(vals["longest_alkyl_chain"]),
            num_alkyl_chains=int(vals["num_alkyl_chains"]),
            water_present=bool(vals["water_present"]),
            terminal_nitrogens=int(vals["terminal_nitrogens"]),
            longest_chain_c_count=int(vals["longest_chain_c_count"]),
            num_same_cations=int(vals["num_same_cations"]),
        )
        records.append(rec)
    return records


def feature_names(include_interactions: bool, extra_pairwise=()) -> tuple[str, ...]:
    """Output column order: originals, composition, then interactions."""
    names = list(NUMERIC_DESCRIPTORS) + list(COMPOSITION_FEATURES)
    if include_interactions:
        names += list(INTERACTION_FEATURES)
        names += [f"product_{a}_x_{b}" for a, b in extra_pairwise]
    return tuple(names)


def build_matrix(
    records: list[DescriptorRecord],
    masses: MassTable | None = None,
    include_interactions: bool = True,
    labels=None,
    row_ids=None,
    extra_pairwise: tuple[tuple[str, str], ...] = (),
) -> DatasetTable:
    """Assemble the feature matrix for a list of descriptor records.

    With include_interactions=False the output equals the leading columns of
    the full matrix (ablation mode). ``extra_pairwise`` appends products of
    named base columns beyond the nine standard interactions.
    """
    if not records:
        raise ValueError("empty record list")
    masses = masses or MassTable.default()
    names = feature_names(include_interactions, extra_pairwise)
    rows = np.empty((len(records), len(names)), dtype=np.float64)
    for i, rec in enumerate(records):
        try:
            rec.validate()
            organic = parse_formula(rec.organic_formula)
            inorganic = parse_formula(rec.inorganic_formula)
            comp = composition_features(organic, inorganic, masses)
        except ValueError as exc:
            raise ValueError(f"record {i}: {exc}") from exc
        base = {name: float(getattr(rec, name)) for name in NUMERIC_DESCRIPTORS}
        base["water_present"] = float(rec.water_present)
        base.update(comp)
        if include_interactions:
            base.update(engineer_features(rec, comp, masses))
            for a, b in extra_pairwise:
                if a not in base or b not in base:
                    raise ValueError(f"extra pairwise product references unknown column: {a}, {b}")
                base[f"product_{a}_x_{b}"] = base[a] * base[b]
        rows[i] = [base[name] for name in names]
    return DatasetTable(
        feature_names=names,
        rows=rows,
        labels=labels,
        row_ids=row_ids,
    )


def feature_manifest(include_interactions: bool = True, extra_pairwise=()) -> list[dict]:
    """Column documentation: name, defining formula, provenance."""
    entries = []
    for name in NUMERIC_DESCRIPTORS:
        entries.append({"name": name, "formula": name, "provenance": "original"})
    for name in COMPOSITION_FEATURES:
        entries.append(
            {
                "name": name,
                "formula": f"{name} expanded from formula units",
                "provenance": "composition",
            }
        )
    if include_interactions:
        for name in INTERACTION_FEATURES:
            entries.append({"name": name, "formula": _FORMULAS[name], "provenance": "interaction"})
        for a, b in extra_pairwise:
            entries.append(
                {
                    "name": f"product_{a}_x_{b}",
                    "formula": f"{a} * {b}",
                    "provenance": "interaction",
                }
            )
    return entries


@dataclass(frozen=True)
class StandardizationParams:
    """Per-column means and population standard deviations.

    Constant columns keep std 0 here; apply() maps them to all zeros and
    invert() restores the constant, so round trips are lossless.
    """

    means: np.ndarray
    stds: np.ndarray

    def to_dict(self) -> dict:
        return {"means": [float(v) for v in self.means], "stds": [float(v) for v in self.stds]}

    @classmethod
    def from_dict(cls, d: dict) -> "StandardizationParams":
        return cls(
            means=np.asarray(d["means"], dtype=np.float64),
            stds=np.asarray(d["stds"], dtype=np.float64),
        )


def standardize_fit(table: DatasetTable) -> StandardizationParams:
    if table.n_rows < 2:
        raise ValueError(f"standardization needs at least 2 rows, got {table.n_rows}")
    means = table.rows.mean(axis=0)
    stds = table.rows.std(axis=0)
    return StandardizationParams(means=means, stds=stds)


def standardize_apply(table: DatasetTable, params: StandardizationParams) -> DatasetTable:
    """Transform using fitted params only; never refits on the input."""
    if len(params.means) != table.n_features:
        raise ValueError("params width does not match table")
    safe = np.where(params.stds > 0.0, params.stds, 1.0)
    z = (table.rows - params.means) / safe
    z[:, params.stds == 0.0] = 0.0
    return table.with_features(table.feature_names, z)


def standardize_invert(table: DatasetTable, params: StandardizationParams) -> DatasetTable:
    if len(params.means) != table.n_features:
        raise ValueError("params width does not match table")
    x = table.rows * params.stds + params.means
    return table.with_features(table.feature_names, x)
