"""Tactile pattern rendering and invariant-moment features.

Contact impressions are rendered analytically (indicator functions in
continuous coordinates, supersampled for antialiasing), so rotated or
rescaled copies of a template differ only by discretization. Features are
the seven classic rotation-invariant moment combinations computed on a
max-normalized image, which makes them insensitive to translation, spatial
scale, rotation and uniform intensity scaling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

__all__ = [
    "PATTERN_NAMES",
    "MomentFeatures",
    "texture_features",
    "render_pattern",
    "augment_pattern",
    "build_pattern_dataset",
    "MOMENT_FEATURE_NAMES",
]

PATTERN_NAMES = ("circle", "rectangle", "hexagon", "triangle", "stripe")
MOMENT_FEATURE_NAMES = [f"moment_{i}" for i in range(1, 8)]

# Intensities below this fraction of the peak are treated as background
# when extracting features for classification.
DEFAULT_DENOISE_FLOOR = 0.15


@dataclass(frozen=True)
class MomentFeatures:
    values: np.ndarray
    degenerate: bool = False


def texture_features(image: np.ndarray, denoise_floor: float = 0.0) -> MomentFeatures:
    """Seven rotation-invariant moment features of a grayscale image.

    The image is normalized by its peak intensity first; `denoise_floor`
    then zeroes anything below that fraction of the peak. A blank image
    yields a zero vector flagged degenerate.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    if img.min() < -1e-9 or img.max() > 1.0 + 1e-9:
        raise ValueError("intensities must lie in [0, 1]")

    peak = img.max()
    if peak <= 0.0:
        return MomentFeatures(np.zeros(7), degenerate=True)
    img = img / peak
    if denoise_floor > 0.0:
        img = np.where(img >= denoise_floor, img, 0.0)
        if img.max() <= 0.0:
            return MomentFeatures(np.zeros(7), degenerate=True)

    ys, xs = np.mgrid[0:img.shape[0], 0:img.shape[1]]
    m00 = img.sum()
    cx = (img * xs).sum() / m00
    cy = (img * ys).sum() / m00
    dx = xs - cx
    dy = ys - cy

    def mu(p: int, q: int) -> float:
        return float((img * dx**p * dy**q).sum())

    def eta(p: int, q: int) -> float:
        return mu(p, q) / m00 ** (1.0 + (p + q) / 2.0)

    n20, n02, n11 = eta(2, 0), eta(0, 2), eta(1, 1)
    n30, n03 = eta(3, 0), eta(0, 3)
    n21, n12 = eta(2, 1), eta(1, 2)

    s1 = n30 + n12
    s2 = n21 + n03
    d1 = n30 - 3 * n12
    d2 = 3 * n21 - n03

    phi = np.array([
        n20 + n02,
        (n20 - n02) ** 2 + 4 * n11**2,
        d1**2 + d2**2,
        s1**2 + s2**2,
        d1 * s1 * (s1**2 - 3 * s2**2) + d2 * s2 * (3 * s1**2 - s2**2),
        (n20 - n02) * (s1**2 - s2**2) + 4 * n11 * s1 * s2,
        d2 * s1 * (s1**2 - 3 * s2**2) - d1 * s2 * (3 * s1**2 - s2**2),
    ])
    return MomentFeatures(phi)


def _indicator(name: str, u: np.ndarray, v: np.ndarray, radius: float) -> np.ndarray:
    r = radius
    if name == "circle":
        return u**2 + v**2 <= r**2
    if name == "rectangle":
        return (np.abs(u) <= r) & (np.abs(v) <= 0.5 * r)
    if name == "hexagon":
        # hexagonal outline: full hex minus a concentric inner hex
        au = np.abs(u)
        slant = au / math.sqrt(3) + np.abs(v)
        width = math.sqrt(3) / 2

        def hexfill(scale: float) -> np.ndarray:
            rr = r * scale
            return (au <= width * rr) & (slant <= rr)

        return hexfill(1.0) & ~hexfill(0.62)
    if name == "triangle":
        return (v >= -0.5 * r) & (v + math.sqrt(3) * np.abs(u) <= r)
    if name == "stripe":
        av = np.abs(v)
        bars = (av <= 0.14 * r) | ((av >= 0.42 * r) & (av <= 0.70 * r))
        return (np.abs(u) <= r) & bars
    raise ValueError(f"unknown pattern: {name!r}")


_COORD_CACHE: dict = {}


def _subpixel_coords(size: int, ss: int) -> np.ndarray:
    key = (size, ss)
    if key not in _COORD_CACHE:
        coords = (np.arange(size * ss) + 0.5) / ss - 0.5
        _COORD_CACHE[key] = coords.astype(np.float32)  # masks are bandwidth-bound
    return _COORD_CACHE[key]


def render_pattern(name: str, size: int = 64, rotation_deg: float = 0.0,
                   scale: float = 1.0, offset: tuple = (0.0, 0.0),
                   supersample: int = 8) -> np.ndarray:
    """Render one pattern template as a [0, 1] grayscale image."""
    if size < 4:
        raise ValueError("size must be >= 4")
    if scale <= 0:
        raise ValueError("scale must be positive")
    ss = max(1, int(supersample))
    coords = _subpixel_coords(size, ss)

    # rotate via outer sums of the 1-D coordinate axes
    x = coords - np.float32((size - 1) / 2.0 + offset[0])
    y = coords - np.float32((size - 1) / 2.0 + offset[1])
    theta = math.radians(rotation_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    u = (sin_t * y)[:, None] + (cos_t * x)[None, :]
    v = (cos_t * y)[:, None] + (-sin_t * x)[None, :]

    mask = _indicator(name, u, v, radius=0.30 * size * scale)
    return mask.reshape(size, ss, size, ss).mean(axis=(1, 3))


def augment_pattern(name: str, rng: np.random.Generator, size: int = 64,
                    noise_std: float = 0.05, scale_range: tuple = (0.85, 1.2),
                    jitter_px: float = 4.0) -> np.ndarray:
    """Randomly rotated/rescaled/shifted template with additive pixel noise."""
    img = render_pattern(
        name, size=size,
        rotation_deg=float(rng.uniform(0.0, 360.0)),
        scale=float(rng.uniform(*scale_range)),
        offset=(float(rng.uniform(-jitter_px, jitter_px)),
                float(rng.uniform(-jitter_px, jitter_px))),
    )
    if noise_std > 0:
        img = img + rng.normal(0.0, noise_std, img.shape)
    return np.clip(img, 0.0, 1.0)


def build_pattern_dataset(patterns, n_per_class: int, seed: int, size: int = 64,
                          noise_std: float = 0.05,
                          denoise_floor: float = DEFAULT_DENOISE_FLOOR) -> Dataset:
    """Moment-feature dataset over augmented renderings of each pattern."""
    patterns = list(patterns)
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    for cls, name in enumerate(patterns):
        for _ in range(n_per_class):
            img = augment_pattern(name, rng, size=size, noise_std=noise_std)
            rows.append(texture_features(img, denoise_floor=denoise_floor).values)
            labels.append(cls)
    return Dataset(np.array(rows), np.array(labels), patterns,
                   split_seed=seed, feature_names=MOMENT_FEATURE_NAMES)
