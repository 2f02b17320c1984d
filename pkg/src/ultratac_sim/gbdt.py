"""Gradient-boosted decision trees for multiclass classification.

Plain one-vs-all boosting on the softmax cross-entropy: every round fits
one exact-split regression tree per class to that class's residuals and
applies a damped Newton leaf step. No sampling or histogramming, so
training is deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import ConfusionMatrix, Dataset

__all__ = [
    "RegressionTree",
    "GBDTModel",
    "train_gbdt",
    "predict",
    "predict_proba",
    "evaluate",
    "save_model",
    "load_model",
]

_MIN_GAIN = 1e-12
_LEAF_CLIP = 10.0
_MODEL_FORMAT = "gbdt-model v1"


class RegressionTree:
    """Depth-limited binary regression tree with exact greedy splits.

    Stored as flat arrays; node i holds either a split (feature, threshold,
    children) or a leaf value.
    """

    def __init__(self, max_depth: int = 3, min_samples_leaf: int = 1):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def fit(self, X: np.ndarray, target: np.ndarray, leaf_value=None) -> "RegressionTree":
        """Grow the tree on `target`; `leaf_value(idx)` maps a leaf's sample
        indices to its output (defaults to the target mean)."""
        if leaf_value is None:
            leaf_value = lambda idx: float(target[idx].mean())
        self._X = X
        self._t = target
        self._leaf_value = leaf_value
        root = self._new_node()
        self._grow(root, np.arange(X.shape[0]), depth=0)
        del self._X, self._t, self._leaf_value
        return self

    def _grow(self, node: int, idx: np.ndarray, depth: int) -> None:
        if depth >= self.max_depth or idx.size < 2 * self.min_samples_leaf:
            self.value[node] = self._leaf_value(idx)
            return
        feat, thr, gain = self._best_split(idx)
        if feat < 0 or gain <= _MIN_GAIN:
            self.value[node] = self._leaf_value(idx)
            return
        go_left = self._X[idx, feat] <= thr
        self.feature[node] = feat
        self.threshold[node] = thr
        left = self._new_node()
        right = self._new_node()
        self.left[node] = left
        self.right[node] = right
        self._grow(left, idx[go_left], depth + 1)
        self._grow(right, idx[~go_left], depth + 1)

    def _best_split(self, idx: np.ndarray) -> tuple[int, float, float]:
        t = self._t[idx]
        n = idx.size
        total = t.sum()
        base = total * total / n
        best_feat, best_thr, best_gain = -1, 0.0, 0.0
        for feat in range(self._X.shape[1]):
            x = self._X[idx, feat]
            order = np.argsort(x, kind="stable")
            xs = x[order]
            prefix = np.cumsum(t[order])
            # candidate cuts between distinct neighbor values
            nl = np.arange(1, n)
            valid = xs[1:] > xs[:-1]
            if self.min_samples_leaf > 1:
                valid &= (nl >= self.min_samples_leaf) & (n - nl >= self.min_samples_leaf)
            if not valid.any():
                continue
            left_sum = prefix[:-1]
            score = left_sum**2 / nl + (total - left_sum) ** 2 / (n - nl)
            score = np.where(valid, score, -np.inf)
            i = int(np.argmax(score))
            gain = float(score[i] - base)
            if gain > best_gain:
                best_feat = feat
                best_thr = float((xs[i] + xs[i + 1]) / 2.0)
                best_gain = gain
        return best_feat, best_thr, best_gain

    def predict(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        value = np.asarray(self.value)
        pos = np.zeros(X.shape[0], dtype=np.int64)
        for _ in range(self.max_depth + 1):
            interior = feature[pos] >= 0
            if not interior.any():
                break
            rows = np.flatnonzero(interior)
            f = feature[pos[rows]]
            go_left = X[rows, f] <= threshold[pos[rows]]
            pos[rows] = np.where(go_left, left[pos[rows]], right[pos[rows]])
        return value[pos]

    def leaf_count(self) -> int:
        return sum(1 for f in self.feature if f < 0)


@dataclass
class GBDTModel:
    """Additive ensemble: per-round, per-class trees over shared features."""

    label_names: list[str]
    arity: int
    learning_rate: float
    max_depth: int
    base_scores: np.ndarray
    trees: list[list[RegressionTree]] = field(default_factory=list)
    train_losses: list[float] = field(default_factory=list)
    seed: int = 0

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    @property
    def n_rounds(self) -> int:
        return len(self.trees)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.arity:
            raise ValueError(f"expected {self.arity} features, got {X.shape[1]}")
        scores = np.tile(self.base_scores, (X.shape[0], 1))
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                scores[:, k] += self.learning_rate * tree.predict(X)
        return scores


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _log_loss(proba: np.ndarray, labels: np.ndarray) -> float:
    picked = proba[np.arange(labels.size), labels]
    return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


def _newton_leaf(residuals: np.ndarray, n_classes: int) -> float:
    num = residuals.sum()
    den = np.abs(residuals) * (1.0 - np.abs(residuals))
    den_sum = max(float(den.sum()), 1e-12)
    k = n_classes
    step = (k - 1) / k * num / den_sum if k > 1 else 0.0
    return float(np.clip(step, -_LEAF_CLIP, _LEAF_CLIP))


def train_gbdt(train: Dataset, n_rounds: int = 100, max_depth: int = 3,
               learning_rate: float = 0.1, seed: int = 42) -> GBDTModel:
    """Fit the boosted ensemble; training log-loss is recorded per round."""
    if train.n_samples == 0:
        raise ValueError("training set is empty")
    if not 0.0 < learning_rate <= 1.0:
        raise ValueError("learning_rate must be in (0, 1]")
    X = train.features
    y = train.labels
    k = len(train.label_names)

    counts = np.bincount(y, minlength=k).astype(np.float64)
    priors = np.maximum(counts, 1e-12) / y.size
    base = np.log(priors)
    model = GBDTModel(list(train.label_names), train.arity, learning_rate,
                      max_depth, base, seed=seed)

    if k < 2:
        # Single-class data: the prior already predicts that class always.
        model.train_losses.append(0.0)
        return model

    onehot = np.zeros((y.size, k))
    onehot[np.arange(y.size), y] = 1.0
    scores = np.tile(base, (y.size, 1))

    for _ in range(n_rounds):
        proba = _softmax(scores)
        model.train_losses.append(_log_loss(proba, y))
        residuals = onehot - proba
        round_trees: list[RegressionTree] = []
        for cls in range(k):
            r = residuals[:, cls]
            tree = RegressionTree(max_depth)
            tree.fit(X, r, leaf_value=lambda idx, r=r: _newton_leaf(r[idx], k))
            scores[:, cls] += learning_rate * tree.predict(X)
            round_trees.append(tree)
        model.trees.append(round_trees)
    model.train_losses.append(_log_loss(_softmax(scores), y))
    return model


def predict_proba(model: GBDTModel, X: np.ndarray) -> np.ndarray:
    if model.n_classes < 2:
        return np.ones((np.atleast_2d(X).shape[0], 1))
    return _softmax(model.decision_scores(X))


def predict(model: GBDTModel, x: np.ndarray) -> tuple[str, np.ndarray]:
    """Label and class probabilities for a single feature vector."""
    proba = predict_proba(model, np.atleast_2d(x))[0]
    return model.label_names[int(np.argmax(proba))], proba


def predict_labels(model: GBDTModel, X: np.ndarray) -> np.ndarray:
    return np.argmax(predict_proba(model, X), axis=1)


def evaluate(model: GBDTModel, test: Dataset) -> ConfusionMatrix:
    """Confusion counts of the model over a test set."""
    if test.n_samples == 0:
        raise ValueError("test set is empty")
    pred = predict_labels(model, test.features)
    k = len(test.label_names)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (test.labels, pred), 1)
    return ConfusionMatrix(counts, list(test.label_names))


def save_model(model: GBDTModel, path) -> None:
    """Versioned plain-text dump: header, then one line per tree node."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_MODEL_FORMAT + "\n")
        fh.write("labels," + ",".join(model.label_names) + "\n")
        fh.write(f"arity,{model.arity}\n")
        fh.write(f"learning_rate,{model.learning_rate!r}\n")
        fh.write(f"max_depth,{model.max_depth}\n")
        fh.write(f"seed,{model.seed}\n")
        fh.write("base," + ",".join(repr(float(v)) for v in model.base_scores) + "\n")
        fh.write(f"rounds,{model.n_rounds}\n")
        for rnd, round_trees in enumerate(model.trees):
            for cls, tree in enumerate(round_trees):
                fh.write(f"tree,{rnd},{cls},{len(tree.feature)}\n")
                for i in range(len(tree.feature)):
                    fh.write(f"node,{tree.feature[i]},{tree.threshold[i]!r},"
                             f"{tree.left[i]},{tree.right[i]},{tree.value[i]!r}\n")


def load_model(path) -> GBDTModel:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != _MODEL_FORMAT:
            raise ValueError(f"unsupported model format: {header!r}")
        labels = fh.readline().strip().split(",")[1:]
        arity = int(fh.readline().strip().split(",")[1])
        lr = float(fh.readline().strip().split(",")[1])
        depth = int(fh.readline().strip().split(",")[1])
        seed = int(fh.readline().strip().split(",")[1])
        base = np.array([float(v) for v in fh.readline().strip().split(",")[1:]])
        rounds = int(fh.readline().strip().split(",")[1])
        model = GBDTModel(labels, arity, lr, depth, base, seed=seed)
        for _ in range(rounds * len(labels) if rounds else 0):
            line = fh.readline().strip()
            if not line:
                break
            tag, rnd, cls, n_nodes = line.split(",")
            assert tag == "tree"
            tree = RegressionTree(depth)
            for _ in range(int(n_nodes)):
                parts = fh.readline().strip().split(",")
                tree.feature.append(int(parts[1]))
                tree.threshold.append(float(parts[2]))
                tree.left.append(int(parts[3]))
                tree.right.append(int(parts[4]))
                tree.value.append(float(parts[5]))
            rnd = int(rnd)
            while len(model.trees) <= rnd:
                model.trees.append([])
            model.trees[rnd].append(tree)
    return model
