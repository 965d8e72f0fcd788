import numpy as np
import pytest

from hmhdim.dataset import DatasetTable, class_distribution
from hmhdim.resample import SmoteConfig, knn_within_class, smote

from helpers import PAPER_PROFILE_COUNTS, random_table


def _table(rows, labels, ids=None):
    rows = np.asarray(rows, dtype=float)
    return DatasetTable(
        tuple(f"f{i}" for i in range(rows.shape[1])),
        rows,
        labels=np.asarray(labels),
        row_ids=ids,
    )


def _imbalanced_table(counts=PAPER_PROFILE_COUNTS, d=4, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.full(n, c) for c, n in sorted(counts.items())])
    return DatasetTable(
        tuple(f"f{i}" for i in range(d)), rng.normal(size=(len(labels), d)), labels=labels
    )


class TestKnnWithinClass:
    def test_collinear_points(self):
        t = _table([[0.0], [1.0], [10.0]], [1, 1, 1])
        nn = knn_within_class(t, 1, 1)
        assert nn == {0: [1], 1: [0], 2: [1]}

    def test_class_with_exactly_k_members(self):
        t = _table([[0.0], [1.0], [5.0]], [2, 2, 0])
        with pytest.raises(ValueError, match="class 2 has 2"):
            knn_within_class(t, 2, 2)

    def test_tie_breaks_to_lower_index(self):
        # rows 1 and 2 are identical, both at distance 1 from row 0
        t = _table([[0.0], [1.0], [1.0]], [0, 0, 0])
        nn = knn_within_class(t, 0, 1)
        assert nn[0] == [1]
        assert nn[1] == [2]  # distance 0 to its duplicate
        assert nn[2] == [1]

    def test_neighbors_are_same_class(self):
        t = random_table(60, 3, seed=1)
        for cls, count in class_distribution(t).items():
            if count < 4:
                continue
            nn = knn_within_class(t, cls, 3)
            for base, neigh in nn.items():
                assert t.labels[base] == cls
                assert all(t.labels[j] == cls for j in neigh)
                assert base not in neigh


class TestSmote:
    def test_balances_to_majority(self):
        t = _imbalanced_table()
        aug, prov = smote(t, SmoteConfig(seed=3))
        assert class_distribution(aug) == {0: 334, 1: 334, 2: 334, 3: 334}
        assert aug.n_rows == 1336
        assert len(prov) == 1336 - 494

    def test_originals_preserved_first(self):
        t = _imbalanced_table(seed=5)
        aug, _ = smote(t, SmoteConfig(seed=1))
        assert np.array_equal(aug.rows[: t.n_rows], t.rows)
        assert np.array_equal(aug.labels[: t.n_rows], t.labels)

    def test_interpolation_identity_and_purity(self):
        t = _imbalanced_table(seed=2)
        aug, prov = smote(t, SmoteConfig(seed=9))
        for i, s in enumerate(prov):
            base = t.rows[s.base_index]
            nn = t.rows[s.neighbor_index]
            assert np.array_equal(s.features, base + s.lam * (nn - base))
            assert np.array_equal(aug.rows[t.n_rows + i], s.features)
            assert t.labels[s.base_index] == s.label
            assert t.labels[s.neighbor_index] == s.label
            assert aug.labels[t.n_rows + i] == s.label
            assert 0.0 <= s.lam <= 1.0

    def test_lambda_endpoints(self):
        base = np.array([3.0, -1.0])
        nn = np.array([7.0, 5.0])
        assert np.array_equal(base + 0.0 * (nn - base), base)
        assert np.array_equal(base + 1.0 * (nn - base), nn)
        assert np.array_equal(
            np.array([0.0, 0.0]) + 0.5 * (np.array([2.0, 2.0]) - np.array([0.0, 0.0])),
            np.array([1.0, 1.0]),
        )

    def test_segment_membership(self):
        t = _imbalanced_table(seed=7)
        aug, prov = smote(t, SmoteConfig(seed=13))
        for s in prov:
            lo = np.minimum(t.rows[s.base_index], t.rows[s.neighbor_index])
            hi = np.maximum(t.rows[s.base_index], t.rows[s.neighbor_index])
            assert np.all(s.features >= lo - 1e-12)
            assert np.all(s.features <= hi + 1e-12)

    def test_bounding_box_per_class(self):
        t = _imbalanced_table(seed=11)
        aug, prov = smote(t, SmoteConfig(seed=4))
        for cls in range(4):
            real = t.rows[t.labels == cls]
            synth = np.array([s.features for s in prov if s.label == cls])
            if synth.size == 0:
                continue
            assert np.all(synth >= real.min(axis=0) - 1e-12)
            assert np.all(synth <= real.max(axis=0) + 1e-12)

    def test_determinism(self):
        t = _imbalanced_table(seed=1)
        a1, p1 = smote(t, SmoteConfig(seed=42))
        a2, p2 = smote(t, SmoteConfig(seed=42))
        assert np.array_equal(a1.rows, a2.rows)
        assert [(s.base_index, s.neighbor_index, s.lam) for s in p1] == [
            (s.base_index, s.neighbor_index, s.lam) for s in p2
        ]

    def test_base_cycling_covers_all_members(self):
        # deficit exceeds class size, so every member must seed a synthetic row
        t = _imbalanced_table({0: 8, 2: 60}, seed=3)
        _, prov = smote(t, SmoteConfig(k_neighbors=3, seed=0))
        bases = {s.base_index for s in prov}
        assert bases == set(np.flatnonzero(t.labels == 0).tolist())

    def test_random_base_mode(self):
        t = _imbalanced_table(seed=8)
        cfg = SmoteConfig(seed=5, random_base=True)
        a1, _ = smote(t, cfg)
        a2, _ = smote(t, cfg)
        assert class_distribution(a1) == {c: 334 for c in range(4)}
        assert np.array_equal(a1.rows, a2.rows)

    def test_target_below_existing_count(self):
        t = _imbalanced_table()
        with pytest.raises(ValueError, match="below existing count"):
            smote(t, SmoteConfig(target_per_class=100))

    def test_minority_too_small_for_k(self):
        t = _imbalanced_table({0: 4, 2: 30})
        with pytest.raises(ValueError, match="class 0 has 4"):
            smote(t, SmoteConfig(k_neighbors=5))

    def test_explicit_target(self):
        t = _imbalanced_table({1: 10, 2: 20}, seed=4)
        aug, _ = smote(t, SmoteConfig(target_per_class=25, k_neighbors=3, seed=1))
        dist = class_distribution(aug)
        assert dist[1] == 25 and dist[2] == 25

    def test_row_ids_extended(self):
        rows = np.random.default_rng(0).normal(size=(12, 2))
        labels = np.array([0] * 4 + [1] * 8)
        t = DatasetTable(("a", "b"), rows, labels=labels, row_ids=tuple(f"r{i}" for i in range(12)))
        aug, prov = smote(t, SmoteConfig(k_neighbors=2, seed=0))
        assert aug.row_ids[:12] == t.row_ids
        assert len(aug.row_ids) == aug.n_rows
        assert all(rid.startswith("synthetic-") for rid in aug.row_ids[12:])

    def test_balanced_table_unchanged(self):
        t = _imbalanced_table({0: 10, 1: 10, 2: 10, 3: 10})
        aug, prov = smote(t, SmoteConfig(seed=2))
        assert prov == []
        assert np.array_equal(aug.rows, t.rows)
