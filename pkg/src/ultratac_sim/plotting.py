"""Self-contained SVG plot output for the experiment harness."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "ultratac-sim"

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_proximity_fit", "plot_confusion", "plot_pca_scatter"]


def plot_proximity_fit(path, actual_cm, estimated_cm, materials,
                       slope: float, intercept: float, r2: float) -> None:
    fig, ax = plt.subplots(figsize=(5, 4), tight_layout=True)
    actual_cm = np.asarray(actual_cm)
    estimated_cm = np.asarray(estimated_cm)
    for name in sorted(set(materials)):
        sel = np.array([m == name for m in materials])
        ax.scatter(actual_cm[sel], estimated_cm[sel], s=12, alpha=0.6, label=name)
    xs = np.linspace(actual_cm.min(), actual_cm.max(), 2)
    ax.plot(xs, slope * xs + intercept, "k-", lw=1,
            label=f"fit (R$^2$={r2:.4f})")
    ax.plot(xs, xs, "k:", lw=0.8)
    ax.set_xlabel("actual distance [cm]")
    ax.set_ylabel("estimated distance [cm]")
    ax.legend(fontsize=7)
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_confusion(path, counts, label_names, accuracy: float) -> None:
    counts = np.asarray(counts, dtype=float)
    k = len(label_names)
    fig, ax = plt.subplots(figsize=(0.6 * k + 2.2, 0.6 * k + 2.0), tight_layout=True)
    row_sums = counts.sum(axis=1, keepdims=True)
    norm = np.divide(counts, row_sums, out=np.zeros_like(counts), where=row_sums > 0)
    ax.imshow(norm, cmap="Blues", vmin=0, vmax=1)
    for i in range(k):
        for j in range(k):
            if counts[i, j]:
                ax.text(j, i, int(counts[i, j]), ha="center", va="center",
                        fontsize=7, color="black" if norm[i, j] < 0.6 else "white")
    ax.set_xticks(range(k), label_names, rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(k), label_names, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(f"accuracy {100 * accuracy:.2f}%", fontsize=9)
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_pca_scatter(path, points, labels, label_names, ratios) -> None:
    points = np.asarray(points)
    fig, ax = plt.subplots(figsize=(5, 4), tight_layout=True)
    for cls, name in enumerate(label_names):
        sel = labels == cls
        ax.scatter(points[sel, 0], points[sel, 1], s=10, alpha=0.65, label=name)
    ax.set_xlabel(f"PC1 ({100 * ratios[0]:.2f}% var)")
    ax.set_ylabel(f"PC2 ({100 * ratios[1]:.2f}% var)")
    ax.legend(fontsize=7)
    fig.savefig(path, format="svg")
    plt.close(fig)
