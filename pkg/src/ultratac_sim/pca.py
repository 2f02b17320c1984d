"""Principal component analysis via eigendecomposition of the sample covariance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PCAProjection", "pca_fit", "pca_transform", "pca_inverse"]

_ZERO_VARIANCE = 1e-300


@dataclass(frozen=True)
class PCAProjection:
    """Mean, top-k orthonormal components (rows) and their variance ratios."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratios: np.ndarray
    degenerate: bool = False


def pca_fit(X: np.ndarray, k: int) -> PCAProjection:
    """Top-k eigenvectors of the sample covariance, ratios against total variance."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least two rows")
    if not 1 <= k <= X.shape[1]:
        raise ValueError("k must be between 1 and the feature arity")

    mean = X.mean(axis=0)
    cov = np.cov(X - mean, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    total = float(eigvals.sum())
    if total <= _ZERO_VARIANCE:
        components = np.eye(X.shape[1])[:k]
        return PCAProjection(mean, components, np.zeros(k), degenerate=True)

    ratios = np.maximum(eigvals[:k], 0.0) / total
    return PCAProjection(mean, eigvecs[:, :k].T.copy(), ratios)


def pca_transform(proj: PCAProjection, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return (X - proj.mean) @ proj.components.T


def pca_inverse(proj: PCAProjection, Y: np.ndarray) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    return Y @ proj.components + proj.mean
