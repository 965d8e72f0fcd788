import numpy as np
import pytest

from hmhdim.formula import (
    FormulaComposition,
    FormulaError,
    MassTable,
    composition_features,
    molecular_weight,
    parse_formula,
)


class TestParseFormula:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("C8H8N4", {"C": 8, "H": 8, "N": 4}),
            ("PbI4", {"Pb": 1, "I": 4}),
            ("(C6H14N)2PbI4", {"C": 12, "H": 28, "N": 2, "Pb": 1, "I": 4}),
            ("H", {"H": 1}),
            ("SnBr3", {"Sn": 1, "Br": 3}),
            ("CHC2", {"C": 3, "H": 1}),  # repeated mentions sum
            ("(CH3)NH2", {"C": 1, "H": 5, "N": 1}),  # group without multiplier
        ],
    )
    def test_corpus(self, text, expected):
        assert parse_formula(text).counts == expected

    @pytest.mark.parametrize(
        "bad,pattern",
        [
            ("Qz4", "unknown element"),
            ("C2(H3", "unclosed"),
            ("C2)H3", "unmatched"),
            ("C0H4", "zero multiplier"),
            ("(CH)0", "zero multiplier"),
            ("()2Pb", "empty group"),
            ("((CH)2N)3", "nested group"),
            ("", "empty"),
            ("  ", "empty"),
            ("C2-H4", "unexpected character"),
            ("4C", "follows nothing"),
        ],
    )
    def test_errors(self, bad, pattern):
        with pytest.raises(FormulaError, match=pattern):
            parse_formula(bad)

    def test_group_expansion_homomorphism(self):
        rng = np.random.default_rng(0)
        symbols = ["C", "H", "N", "O", "Pb", "I", "Br", "Sn"]
        for _ in range(100):
            parts = []
            for _ in range(int(rng.integers(1, 5))):
                sym = symbols[rng.integers(0, len(symbols))]
                cnt = int(rng.integers(1, 10))
                parts.append(sym if cnt == 1 else f"{sym}{cnt}")
            inner = "".join(parts)
            n = int(rng.integers(1, 10))
            base = parse_formula(inner).counts
            grouped = parse_formula(f"({inner}){n}").counts
            assert grouped == {sym: cnt * n for sym, cnt in base.items()}

    def test_composition_rejects_nonpositive_counts(self):
        with pytest.raises(ValueError):
            FormulaComposition({"C": 0})


class TestMolecularWeight:
    def test_water(self, mass_table):
        w = molecular_weight(FormulaComposition({"H": 2, "O": 1}), mass_table)
        assert w == pytest.approx(18.015, abs=0.01)

    def test_carbon(self, mass_table):
        assert molecular_weight(FormulaComposition({"C": 1}), mass_table) == pytest.approx(12.011)

    def test_empty_composition(self, mass_table):
        with pytest.raises(ValueError, match="empty"):
            molecular_weight(FormulaComposition({}), mass_table)

    def test_missing_element_named(self):
        table = MassTable({"H": 1.008})
        with pytest.raises(ValueError, match="'C'"):
            molecular_weight(FormulaComposition({"C": 2, "H": 2}), table)

    def test_linearity(self, mass_table):
        rng = np.random.default_rng(3)
        symbols = list(mass_table.masses)[:20]
        for _ in range(50):
            a = {symbols[i]: int(rng.integers(1, 6)) for i in rng.integers(0, 20, 3)}
            b = {symbols[i]: int(rng.integers(1, 6)) for i in rng.integers(0, 20, 3)}
            merged = dict(a)
            for sym, cnt in b.items():
                merged[sym] = merged.get(sym, 0) + cnt
            lhs = molecular_weight(FormulaComposition(merged), mass_table)
            rhs = molecular_weight(FormulaComposition(a), mass_table) + molecular_weight(
                FormulaComposition(b), mass_table
            )
            assert lhs == pytest.approx(rhs, abs=1e-9)


class TestCompositionFeatures:
    def test_halide_metal_ratio(self, mass_table):
        feats = composition_features(
            parse_formula("C8H8N4"), parse_formula("PbI4"), mass_table
        )
        assert feats["halide_metal_ratio"] == 4.0
        assert feats["inorganic_b_site_count"] == 1.0
        assert feats["inorganic_halide_count"] == 4.0

    def test_heavy_atom_count(self, mass_table):
        feats = composition_features(
            parse_formula("C8H8N4"), parse_formula("PbI4"), mass_table
        )
        assert feats["organic_heavy_atoms"] == 12.0

    def test_organic_weight_and_n_count(self, mass_table):
        feats = composition_features(
            parse_formula("C6H14N"), parse_formula("PbI4"), mass_table
        )
        assert feats["organic_n_count"] == 1.0
        assert feats["organic_mol_weight"] == pytest.approx(100.2, abs=0.1)

    def test_zero_metal_guarded(self, mass_table):
        feats = composition_features(
            parse_formula("C2H6"), parse_formula("I4"), mass_table
        )
        assert feats["inorganic_b_site_count"] == 0.0
        assert feats["halide_metal_ratio"] == 4.0  # divided by max(1, metals)
