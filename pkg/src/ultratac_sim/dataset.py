"""Labeled feature datasets and evaluation counts."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Dataset", "ConfusionMatrix"]


@dataclass
class Dataset:
    """Feature matrix with integer labels indexing `label_names`."""

    features: np.ndarray
    labels: np.ndarray
    label_names: list[str]
    split_seed: int = 0
    feature_names: "list[str] | None" = None

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must align with feature rows")
        if self.labels.size and (self.labels.min() < 0
                                 or self.labels.max() >= len(self.label_names)):
            raise ValueError("labels must index label_names")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def arity(self) -> int:
        return self.features.shape[1]

    def stratified_split(self, train_fraction: float = 0.8,
                         seed: "int | None" = None) -> tuple["Dataset", "Dataset"]:
        """Per-class shuffled split, e.g. 8:2 for the default fraction."""
        if not 0.0 < train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        rng = np.random.default_rng(self.split_seed if seed is None else seed)
        train_idx: list[np.ndarray] = []
        test_idx: list[np.ndarray] = []
        for cls in range(len(self.label_names)):
            idx = np.flatnonzero(self.labels == cls)
            rng.shuffle(idx)
            cut = int(round(train_fraction * idx.size))
            train_idx.append(idx[:cut])
            test_idx.append(idx[cut:])
        tr = np.concatenate(train_idx) if train_idx else np.array([], dtype=int)
        te = np.concatenate(test_idx) if test_idx else np.array([], dtype=int)
        make = lambda sel: Dataset(self.features[sel], self.labels[sel],
                                   self.label_names, self.split_seed, self.feature_names)
        return make(tr), make(te)

    def to_csv(self, path) -> None:
        names = self.feature_names or [f"f{i}" for i in range(self.arity)]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(["label"] + names) + "\n")
            for row, lab in zip(self.features, self.labels):
                fh.write(",".join([self.label_names[lab]]
                                  + [repr(float(v)) for v in row]) + "\n")

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            feature_names = header[1:]
            rows, names = [], []
            for line in fh:
                parts = line.strip().split(",")
                if len(parts) < 2:
                    continue
                names.append(parts[0])
                rows.append([float(v) for v in parts[1:]])
        label_names = sorted(set(names))
        index = {n: i for i, n in enumerate(label_names)}
        labels = np.array([index[n] for n in names], dtype=np.int64)
        return cls(np.array(rows), labels, label_names, feature_names=feature_names)


@dataclass
class ConfusionMatrix:
    """Row = true class, column = predicted class."""

    counts: np.ndarray
    label_names: list[str]

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.label_names)
        if self.counts.shape != (k, k):
            raise ValueError("counts must be K x K")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total) if self.total else 0.0

    def per_class_accuracy(self) -> np.ndarray:
        row_sums = self.counts.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            acc = np.where(row_sums > 0, np.diag(self.counts) / row_sums, 0.0)
        return acc

    def confusable_pairs(self, rate: float = 0.2) -> list[tuple[str, str, float]]:
        """Class pairs whose off-diagonal confusion reaches `rate`."""
        out = []
        row_sums = self.counts.sum(axis=1)
        for i in range(len(self.label_names)):
            if row_sums[i] == 0:
                continue
            for j in range(len(self.label_names)):
                if i == j:
                    continue
                r = self.counts[i, j] / row_sums[i]
                if r >= rate:
                    out.append((self.label_names[i], self.label_names[j], float(r)))
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(["true\\pred"] + self.label_names) + "\n")
            for name, row in zip(self.label_names, self.counts):
                fh.write(",".join([name] + [str(int(v)) for v in row]) + "\n")
