import numpy as np
import pytest

from hmhdim.dataset import DatasetTable
from hmhdim.models import predict_label, predict_proba, train_gbt


def _table(X, y):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return DatasetTable(tuple(f"f{i}" for i in range(X.shape[1])), X, labels=np.asarray(y))


class TestTrainGbt:
    def test_loss_trace_non_increasing_random_data(self):
        rng = np.random.default_rng(0)
        for trial in range(5):
            n = int(rng.integers(30, 80))
            d = int(rng.integers(2, 5))
            X = rng.normal(size=(n, d))
            y = rng.integers(0, 4, size=n)
            model = train_gbt(_table(X, y), n_rounds=40, learning_rate=0.2, max_depth=2)
            trace = np.array(model.loss_trace)
            assert len(trace) == 41
            assert np.all(np.diff(trace) <= 0.0)

    def test_single_round_stump_separable(self):
        x = np.array([-2.0, -1.5, -1.0, 1.0, 1.5, 2.0])
        y = np.array([0, 0, 0, 1, 1, 1])
        model = train_gbt(_table(x, y), n_rounds=1, learning_rate=1.0, max_depth=1)
        assert np.mean(predict_label(model, x[:, None]) == y) == 1.0

    def test_learning_rate_bounds(self):
        t = _table([[0.0], [1.0]], [0, 1])
        for lr in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError, match="learning_rate"):
                train_gbt(t, n_rounds=1, learning_rate=lr)

    def test_n_rounds_bound(self):
        t = _table([[0.0], [1.0]], [0, 1])
        with pytest.raises(ValueError, match="n_rounds"):
            train_gbt(t, n_rounds=0)

    def test_fits_informative_data(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(150, 4))
        y = (X[:, 0] > 0).astype(int) + 2 * (X[:, 1] > 0).astype(int)
        model = train_gbt(_table(X, y), n_rounds=40, learning_rate=0.3, max_depth=3)
        assert np.mean(predict_label(model, X) == y) > 0.97

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(40, 3))
        y = rng.integers(0, 4, 40)
        model = train_gbt(_table(X, y), n_rounds=10, learning_rate=0.1)
        probs = predict_proba(model, X)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(probs >= 0.0)

    def test_rounds_shape(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(30, 2))
        y = rng.integers(0, 3, 30)
        model = train_gbt(_table(X, y), n_rounds=7, learning_rate=0.2)
        assert len(model.rounds) == 7
        assert all(len(trees) == 4 for trees in model.rounds)

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 3))
        y = rng.integers(0, 4, 50)
        m1 = train_gbt(_table(X, y), n_rounds=15, learning_rate=0.2)
        m2 = train_gbt(_table(X, y), n_rounds=15, learning_rate=0.2)
        assert np.array_equal(predict_proba(m1, X), predict_proba(m2, X))
