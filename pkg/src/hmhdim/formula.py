"""Chemical formula parsing and composition-derived numeric features.

Handles plain formulas ("C8H8N4", "PbI4") and parenthesized groups with an
integer multiplier ("(C6H14N)2PbI4"). One level of grouping is supported;
deeper nesting is rejected with a clear error. Atomic masses ship as a CSV
data file (symbol, mass_amu) so the values are auditable.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

HALOGENS = frozenset({"F", "Cl", "Br", "I"})
# Elements that never count toward the inorganic B (metal) site.
_NON_METAL = HALOGENS | {"H", "O"}

_TOKEN = re.compile(r"([A-Z][a-z]?)|(\d+)|([()])|(\S)")


class FormulaError(ValueError):
    """Raised for malformed formula strings; message carries the position."""


@dataclass(frozen=True)
class FormulaComposition:
    """Element symbol -> positive integer count."""

    counts: dict[str, int]

    def __post_init__(self):
        for sym, n in self.counts.items():
            if n < 1:
                raise ValueError(f"count for {sym} must be >= 1, got {n}")

    def get(self, symbol: str) -> int:
        return self.counts.get(symbol, 0)

    def total_atoms(self) -> int:
        return sum(self.counts.values())

    def heavy_atoms(self) -> int:
        """Atom count excluding hydrogen."""
        return sum(n for sym, n in self.counts.items() if sym != "H")

    def to_dict(self) -> dict[str, int]:
        return dict(sorted(self.counts.items()))


@dataclass(frozen=True)
class MassTable:
    """Standard atomic masses (amu) keyed by element symbol."""

    masses: dict[str, float]

    @classmethod
    def load(cls, path) -> "MassTable":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"mass table not found: {path}")
        masses: dict[str, float] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(reader.fieldnames) < {"symbol", "mass_amu"}:
                raise ValueError(f"{path}: expected header 'symbol,mass_amu'")
            for row in reader:
                masses[row["symbol"].strip()] = float(row["mass_amu"])
        if not masses:
            raise ValueError(f"{path}: no mass entries")
        return cls(masses)

    @classmethod
    def default(cls) -> "MassTable":
        ref = resources.files("hmhdim.data").joinpath("atomic_masses.csv")
        with resources.as_file(ref) as path:
            return cls.load(path)


_DEFAULT_SYMBOLS: frozenset[str] | None = None


def _known_symbols() -> frozenset[str]:
    global _DEFAULT_SYMBOLS
    if _DEFAULT_SYMBOLS is None:
        _DEFAULT_SYMBOLS = frozenset(MassTable.default().masses)
    return _DEFAULT_SYMBOLS


def _tokenize(s: str) -> list[tuple[str, object, int]]:
    tokens = []
    for m in _TOKEN.finditer(s):
        sym, num, paren, junk = m.groups()
        if junk is not None:
            raise FormulaError(f"{s!r}: unexpected character {junk!r} at position {m.start()}")
        if sym is not None:
            tokens.append(("sym", sym, m.start()))
        elif num is not None:
            tokens.append(("num", int(num), m.start()))
        else:
            tokens.append((paren, paren, m.start()))
    return tokens


def parse_formula(text: str) -> FormulaComposition:
    """Parse a formula string into element counts.

    Repeated element mentions are summed; group counts multiply through.
    Raises FormulaError for unknown symbols, dangling parentheses, zero
    multipliers, empty groups, or nesting deeper than one level.
    """
    if not isinstance(text, str) or not text.strip():
        raise FormulaError("formula string is empty")
    s = text.strip()
    symbols = _known_symbols()
    tokens = _tokenize(s)
    n_tok = len(tokens)
    counts: dict[str, int] = {}

    def read_count(i: int) -> tuple[int, int]:
        """Optional integer following an element or group; defaults to 1."""
        if i < n_tok and tokens[i][0] == "num":
            val = tokens[i][1]
            if val == 0:
                raise FormulaError(f"{s!r}: zero multiplier at position {tokens[i][2]}")
            return val, i + 1
        return 1, i

    def read_element(i: int, target: dict[str, int]) -> int:
        _, sym, pos = tokens[i]
        if sym not in symbols:
            raise FormulaError(f"{s!r}: unknown element symbol {sym!r} at position {pos}")
        cnt, i = read_count(i + 1)
        target[sym] = target.get(sym, 0) + cnt
        return i

    i = 0
    while i < n_tok:
        kind, val, pos = tokens[i]
        if kind == "sym":
            i = read_element(i, counts)
        elif kind == "(":
            open_pos = pos
            i += 1
            group: dict[str, int] = {}
            while i < n_tok and tokens[i][0] != ")":
                gkind, _, gpos = tokens[i]
                if gkind == "(":
                    raise FormulaError(
                        f"{s!r}: nested group at position {gpos}, only one level is supported"
                    )
                if gkind != "sym":
                    raise FormulaError(f"{s!r}: unexpected count at position {gpos}")
                i = read_element(i, group)
            if i >= n_tok:
                raise FormulaError(f"{s!r}: unclosed '(' at position {open_pos}")
            if not group:
                raise FormulaError(f"{s!r}: empty group at position {open_pos}")
            i += 1  # consume ')'
            mult, i = read_count(i)
            for gsym, gcnt in group.items():
                counts[gsym] = counts.get(gsym, 0) + gcnt * mult
        elif kind == ")":
            raise FormulaError(f"{s!r}: unmatched ')' at position {pos}")
        else:
            raise FormulaError(f"{s!r}: count at position {pos} follows nothing")

    if not counts:
        raise FormulaError(f"{s!r}: no elements found")
    return FormulaComposition(counts)


def molecular_weight(comp: FormulaComposition, masses: MassTable) -> float:
    """Sum of count(e) * mass(e) over the composition, in amu."""
    if not comp.counts:
        raise ValueError("empty composition has no molecular weight")
    total = 0.0
    for sym in comp.counts:
        if sym not in masses.masses:
            raise ValueError(f"element {sym!r} missing from mass table")
    for sym, n in comp.counts.items():
        total += n * masses.masses[sym]
    return total


def composition_features(
    organic: FormulaComposition,
    inorganic: FormulaComposition,
    masses: MassTable,
) -> dict[str, float]:
    """Numeric features expanded from the organic and inorganic formula units.

    The inorganic B-site count tallies atoms that are not halogens, H, or O,
    which covers the metal site without a curated metal list. The
    halide-to-metal ratio guards a zero metal count by dividing by at
    least 1.
    """
    org_mw = molecular_weight(organic, masses)
    inorg_mw = molecular_weight(inorganic, masses)
    b_site = sum(n for sym, n in inorganic.counts.items() if sym not in _NON_METAL)
    halides = sum(n for sym, n in inorganic.counts.items() if sym in HALOGENS)
    return {
        "organic_c_count": float(organic.get("C")),
        "organic_h_count": float(organic.get("H")),
        "organic_n_count": float(organic.get("N")),
        "organic_o_count": float(organic.get("O")),
        "organic_heavy_atoms": float(organic.heavy_atoms()),
        "organic_mol_weight": org_mw,
        "inorganic_b_site_count": float(b_site),
        "inorganic_halide_count": float(halides),
        "halide_metal_ratio": halides / max(1, b_site),
        "inorganic_mol_weight": inorg_mw,
    }
