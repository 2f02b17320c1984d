import numpy as np
import pytest

from ultratac_sim.dataset import ConfusionMatrix, Dataset
from ultratac_sim.gbdt import (GBDTModel, evaluate, load_model, predict,
                               predict_labels, predict_proba, save_model, train_gbdt)


def blobs_dataset(n_per_class=25, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal([0.0, 0.0], 0.4, (n_per_class, 2))
    b = rng.normal([3.0, 3.0], 0.4, (n_per_class, 2))
    X = np.vstack([a, b])
    y = np.array([0] * n_per_class + [1] * n_per_class)
    return Dataset(X, y, ["alpha", "beta"], split_seed=seed)


def xor_dataset(n=60, seed=1):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, (n, 2))
    y = ((X[:, 0] > 0.5) ^ (X[:, 1] > 0.5)).astype(int)
    return Dataset(X, y, ["even", "odd"], split_seed=seed)


class TestTraining:
    def test_separable_blobs_perfect_within_20_rounds(self):
        data = blobs_dataset()
        model = train_gbdt(data, n_rounds=20)
        pred = predict_labels(model, data.features)
        assert np.mean(pred == data.labels) == 1.0

    def test_xor_with_depth_2_trees(self):
        data = xor_dataset()
        model = train_gbdt(data, n_rounds=100, max_depth=2)
        pred = predict_labels(model, data.features)
        assert np.mean(pred == data.labels) == 1.0

    def test_training_loss_non_increasing(self):
        data = xor_dataset(n=120, seed=3)
        model = train_gbdt(data, n_rounds=100, max_depth=3)
        losses = model.train_losses
        assert len(losses) == 101
        assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))

    def test_single_class_degenerate_constant_predictor(self):
        X = np.random.default_rng(0).normal(size=(10, 3))
        data = Dataset(X, np.zeros(10, dtype=int), ["only"])
        model = train_gbdt(data)
        label, proba = predict(model, X[0])
        assert label == "only"
        assert proba == pytest.approx([1.0])

    def test_training_point_predicted_as_own_label(self):
        data = blobs_dataset()
        model = train_gbdt(data, n_rounds=20)
        label, _ = predict(model, data.features[0])
        assert label == "alpha"
        label, _ = predict(model, data.features[-1])
        assert label == "beta"

    def test_deterministic_given_seed(self):
        data = blobs_dataset(seed=5)
        m1 = train_gbdt(data, n_rounds=10, seed=42)
        m2 = train_gbdt(data, n_rounds=10, seed=42)
        assert m1.train_losses == m2.train_losses
        X = np.random.default_rng(9).normal(1.5, 1.0, (50, 2))
        assert np.array_equal(predict_proba(m1, X), predict_proba(m2, X))

    def test_empty_training_set_rejected(self):
        with pytest.raises(ValueError):
            train_gbdt(Dataset(np.zeros((0, 2)), np.zeros(0, dtype=int), ["a"]))

    def test_bad_learning_rate_rejected(self):
        with pytest.raises(ValueError):
            train_gbdt(blobs_dataset(), learning_rate=0.0)


class TestPredict:
    def test_probabilities_sum_to_one(self):
        data = blobs_dataset()
        model = train_gbdt(data, n_rounds=15)
        X = np.random.default_rng(2).normal(1.5, 2.0, (100, 2))
        proba = predict_proba(model, X)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(proba >= 0)

    def test_arity_mismatch_rejected(self):
        model = train_gbdt(blobs_dataset(), n_rounds=5)
        with pytest.raises(ValueError):
            predict(model, np.zeros(3))

    def test_argmax_invariant_under_score_rescaling(self):
        data = blobs_dataset()
        model = train_gbdt(data, n_rounds=15)
        X = np.random.default_rng(3).normal(1.5, 2.0, (50, 2))
        scores = model.decision_scores(X)
        assert np.array_equal(np.argmax(scores, axis=1),
                              np.argmax(scores * 4.2, axis=1))


class TestEvaluate:
    def test_perfect_predictor_diagonal(self):
        data = blobs_dataset()
        model = train_gbdt(data, n_rounds=20)
        cm = evaluate(model, data)
        assert cm.accuracy == 1.0
        assert np.count_nonzero(cm.counts - np.diag(np.diag(cm.counts))) == 0

    def test_constant_predictor_chance_accuracy(self):
        # single-class training makes a constant model; evaluate it against a
        # balanced two-class set relabeled to share the label space
        X = np.random.default_rng(0).normal(size=(40, 2))
        train = Dataset(X[:20], np.zeros(20, dtype=int), ["a", "b"])
        model = train_gbdt(train)
        test = Dataset(X, np.array([0] * 20 + [1] * 20), ["a", "b"])
        cm = evaluate(model, test)
        assert cm.accuracy == pytest.approx(0.5)

    def test_rows_sum_to_class_counts(self):
        data = blobs_dataset(n_per_class=30)
        model = train_gbdt(data, n_rounds=10)
        cm = evaluate(model, data)
        assert cm.counts.sum(axis=1).tolist() == [30, 30]

    def test_empty_test_rejected(self):
        model = train_gbdt(blobs_dataset(), n_rounds=5)
        with pytest.raises(ValueError):
            evaluate(model, Dataset(np.zeros((0, 2)), np.zeros(0, dtype=int), ["a", "b"]))


class TestConfusionMatrix:
    def test_validation(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(np.zeros((2, 3)), ["a", "b"])
        with pytest.raises(ValueError):
            ConfusionMatrix(np.array([[1, -1], [0, 1]]), ["a", "b"])

    def test_accuracy_and_csv(self, tmp_path):
        cm = ConfusionMatrix(np.array([[8, 2], [1, 9]]), ["a", "b"])
        assert cm.accuracy == pytest.approx(0.85)
        path = tmp_path / "cm.csv"
        cm.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "true\\pred,a,b"
        assert lines[1] == "a,8,2"

    def test_confusable_pairs(self):
        cm = ConfusionMatrix(np.array([[10, 10], [0, 20]]), ["a", "b"])
        pairs = cm.confusable_pairs(rate=0.2)
        assert pairs == [("a", "b", 0.5)]


class TestSerialization:
    def test_round_trip_preserves_predictions(self, tmp_path):
        data = blobs_dataset(seed=11)
        model = train_gbdt(data, n_rounds=12, max_depth=3)
        path = tmp_path / "model.txt"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.label_names == model.label_names
        assert loaded.learning_rate == model.learning_rate
        X = np.random.default_rng(4).normal(1.5, 2.0, (80, 2))
        assert np.array_equal(predict_proba(loaded, X), predict_proba(model, X))

    def test_format_header_checked(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not-a-model v9\n")
        with pytest.raises(ValueError):
            load_model(path)

    def test_single_class_round_trip(self, tmp_path):
        X = np.random.default_rng(0).normal(size=(5, 2))
        model = train_gbdt(Dataset(X, np.zeros(5, dtype=int), ["only"]))
        path = tmp_path / "m.txt"
        save_model(model, path)
        loaded = load_model(path)
        assert predict(loaded, X[0])[0] == "only"


class TestDataset:
    def test_stratified_split_ratio(self):
        X = np.random.default_rng(0).normal(size=(200, 3))
        y = np.array([0] * 100 + [1] * 100)
        data = Dataset(X, y, ["a", "b"], split_seed=7)
        train, test = data.stratified_split(0.8)
        assert train.n_samples == 160 and test.n_samples == 40
        assert np.bincount(train.labels).tolist() == [80, 80]
        assert np.bincount(test.labels).tolist() == [20, 20]

    def test_split_deterministic(self):
        X = np.random.default_rng(1).normal(size=(100, 2))
        y = np.array([0, 1] * 50)
        data = Dataset(X, y, ["a", "b"])
        t1, _ = data.stratified_split(0.8, seed=3)
        t2, _ = data.stratified_split(0.8, seed=3)
        assert np.array_equal(t1.features, t2.features)

    def test_csv_round_trip(self, tmp_path):
        X = np.random.default_rng(2).normal(size=(6, 2))
        y = np.array([0, 1, 2, 0, 1, 2])
        data = Dataset(X, y, ["ant", "bee", "cat"], feature_names=["f_a", "f_b"])
        path = tmp_path / "data.csv"
        data.to_csv(path)
        back = Dataset.from_csv(path)
        assert back.label_names == ["ant", "bee", "cat"]
        assert back.feature_names == ["f_a", "f_b"]
        assert np.allclose(back.features, X)
        assert np.array_equal(back.labels, y)

    def test_label_validation(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 2)), np.array([0, 5]), ["a", "b"])
