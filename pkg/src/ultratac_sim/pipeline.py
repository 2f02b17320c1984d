"""Preprocessing and feature extraction for echo frames.

A per-sample scalar Kalman filter denoises consecutive frames, an
empty-scene reference enables difference-frame time-of-flight ranging, and
a Fourier stage turns material-mode frames into spectral feature vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .echo import BLIND_TIME_S, EchoFrame
from .modes import SensorMode

__all__ = [
    "KalmanParams",
    "KalmanDenoiser",
    "kalman_filter",
    "ReferenceFrame",
    "capture_reference",
    "DistanceEstimate",
    "estimate_distance",
    "SpectralFeatures",
    "spectral_features",
    "FEATURE_BASE_NAMES",
]


@dataclass(frozen=True)
class KalmanParams:
    """Variances of the scalar random-walk filter run at each sample index."""

    process_noise_q: float
    measurement_noise_r: float
    initial_covariance: float = 1.0

    def __post_init__(self) -> None:
        if min(self.process_noise_q, self.measurement_noise_r, self.initial_covariance) <= 0:
            raise ValueError("Kalman variances must all be positive")


class KalmanDenoiser:
    """Filters a stream of equally-shaped frames, one scalar state per sample.

    The covariance update does not depend on the data, so a single scalar
    covariance serves every sample index. One instance owns one stream.
    """

    def __init__(self, params: KalmanParams):
        self.params = params
        self._state: np.ndarray | None = None
        self._cov = params.initial_covariance
        self.gain = 0.0

    def process(self, frame: EchoFrame) -> EchoFrame:
        z = frame.samples
        if self._state is None:
            self._state = z.copy()
            return replace_samples(frame, self._state.copy())
        if z.shape != self._state.shape:
            raise ValueError("frame shape changed mid-stream")
        q, r = self.params.process_noise_q, self.params.measurement_noise_r
        self._cov += q
        self.gain = self._cov / (self._cov + r)
        self._state = self._state + self.gain * (z - self._state)
        self._cov = (1.0 - self.gain) * self._cov
        return replace_samples(frame, self._state.copy())


def replace_samples(frame: EchoFrame, samples: np.ndarray) -> EchoFrame:
    return EchoFrame(samples, frame.sample_rate, frame.t0, frame.gain_db,
                     frame.pulse_count, frame.mode)


def kalman_filter(frames, params: KalmanParams):
    """Yield denoised copies of `frames`, in order."""
    denoiser = KalmanDenoiser(params)
    for frame in frames:
        yield denoiser.process(frame)


@dataclass(frozen=True)
class ReferenceFrame:
    """Empty-scene mean frame plus the residual noise level seen during capture."""

    samples: np.ndarray
    residual_std: float
    n_frames: int


def _as_samples(frame) -> np.ndarray:
    return frame.samples if hasattr(frame, "samples") else np.asarray(frame, dtype=np.float64)


def capture_reference(frames) -> ReferenceFrame:
    """Pointwise mean of the capture frames (no target in scene)."""
    stack = [np.asarray(_as_samples(f), dtype=np.float64) for f in frames]
    if not stack:
        raise ValueError("reference capture needs at least one frame")
    arr = np.stack(stack)
    mean = arr.mean(axis=0)
    residual = float(np.sqrt(np.mean((arr - mean) ** 2))) if len(stack) > 1 else 0.0
    return ReferenceFrame(mean, residual, len(stack))


@dataclass(frozen=True)
class DistanceEstimate:
    distance_m: float
    peak_time_s: float
    peak_amplitude: float
    valid: bool


def estimate_distance(current: EchoFrame, reference: ReferenceFrame,
                      c_air: float = 343.0, blind: float = BLIND_TIME_S,
                      threshold: "float | None" = None) -> DistanceEstimate:
    """Difference-frame time-of-flight ranging.

    Subtracts the reference pointwise, searches for the strongest deviation
    after the blind zone, and converts its time to a one-way distance. The
    peak sample is refined by log-parabolic interpolation of its two
    neighbors, which recovers the exact center of a Gaussian echo lobe.
    The estimate is valid only when the peak clears the detection
    threshold (default: five times the reference residual noise). Ties
    break toward the earliest sample, i.e. the nearest surface.
    """
    if current.mode is not SensorMode.PROXIMITY:
        raise ValueError("distance estimation expects a proximity-mode frame")
    ref = reference.samples
    if current.samples.shape != ref.shape:
        raise ValueError("frame and reference shapes differ")

    fs = current.sample_rate
    diff = np.abs(current.samples - ref)
    start = int(math.floor(blind * fs)) + 1
    if start >= diff.size:
        return DistanceEstimate(math.nan, math.nan, 0.0, False)

    segment = diff[start:]
    idx = int(np.argmax(segment))
    peak_amp = float(segment[idx])
    peak_time = (start + idx + _subsample_offset(segment, idx)) / fs
    thr = threshold if threshold is not None else 5.0 * reference.residual_std
    valid = peak_amp > thr
    return DistanceEstimate(c_air * peak_time / 2.0, peak_time, peak_amp, valid)


def _subsample_offset(segment: np.ndarray, idx: int) -> float:
    """Vertex of the parabola through log of the peak and its neighbors."""
    if idx <= 0 or idx >= segment.size - 1:
        return 0.0
    left, center, right = segment[idx - 1:idx + 2]
    if min(left, center, right) <= 0.0:
        return 0.0
    a, b, c = math.log(left), math.log(center), math.log(right)
    curvature = a - 2.0 * b + c
    if curvature >= 0.0:
        return 0.0
    return float(np.clip(0.5 * (a - c) / curvature, -0.5, 0.5))


FEATURE_BASE_NAMES = ("contrast_db", "kurtosis", "skewness", "entropy_bits", "centroid_hz")

_DB_FLOOR = 1e-30


@dataclass(frozen=True)
class SpectralFeatures:
    """Fourier-derived feature vector of one envelope frame.

    The power spectrum (DC excluded) is normalized to a unit-sum
    distribution over frequency; entropy, the standardized moments and the
    centroid are computed against it, and contrast averages the peak-to-
    valley dB span over log-spaced bands. Amplitude scaling of the frame
    leaves every field unchanged.
    """

    contrast_db: float
    kurtosis: float
    skewness: float
    entropy_bits: float
    centroid_hz: float
    band_energies: np.ndarray
    n_bins: int
    degenerate: bool = False

    def to_vector(self) -> np.ndarray:
        head = np.array([self.contrast_db, self.kurtosis, self.skewness,
                         self.entropy_bits, self.centroid_hz])
        return np.concatenate([head, self.band_energies])

    @staticmethod
    def vector_names(n_bands: int) -> list[str]:
        return list(FEATURE_BASE_NAMES) + [f"band_{i}" for i in range(n_bands)]


def _band_edges(n_bins: int, n_bands: int) -> np.ndarray:
    # Log-spaced over bin index, each band forced to hold at least one bin.
    raw = np.logspace(0.0, math.log10(n_bins), n_bands + 1)
    edges = np.zeros(n_bands + 1, dtype=int)
    for i in range(1, n_bands + 1):
        edges[i] = max(edges[i - 1] + 1, int(round(raw[i])) - 1)
    edges[-1] = n_bins
    if np.any(np.diff(edges) < 1):
        raise ValueError("too few spectrum bins for the requested band count")
    return edges


def spectral_features(frame, n_bands: int = 8,
                      sample_rate: "float | None" = None) -> SpectralFeatures:
    """Extract the spectral feature vector of a frame (or raw sample array)."""
    if n_bands < 2:
        raise ValueError("n_bands must be >= 2")
    samples = _as_samples(frame)
    if samples.size == 0:
        raise ValueError("frame must be non-empty")
    fs = sample_rate if sample_rate is not None else getattr(frame, "sample_rate", 2.4e6)

    spectrum = np.abs(np.fft.rfft(samples))
    power = spectrum[1:] ** 2            # DC carries no material information
    freqs = np.fft.rfftfreq(samples.size, d=1.0 / fs)[1:]
    n_bins = power.size
    if n_bins < n_bands:
        raise ValueError("too few spectrum bins for the requested band count")

    total = float(power.sum())
    if total <= 0.0:
        return SpectralFeatures(0.0, 0.0, 0.0, 0.0, 0.0,
                                np.zeros(n_bands), n_bins, degenerate=True)

    p = power / total
    nonzero = p[p > 0]
    entropy = float(-(nonzero * np.log2(nonzero)).sum())

    centroid = float((freqs * p).sum())
    var = float(((freqs - centroid) ** 2 * p).sum())
    sigma = math.sqrt(var)
    if sigma > 0:
        z = (freqs - centroid) / sigma
        skewness = float((z**3 * p).sum())
        kurtosis = float((z**4 * p).sum())
    else:
        skewness = 0.0
        kurtosis = 0.0

    edges = _band_edges(n_bins, n_bands)
    band_energies = np.empty(n_bands)
    spans = np.empty(n_bands)
    for b in range(n_bands):
        chunk = p[edges[b]:edges[b + 1]]
        band_energies[b] = chunk.sum()
        spans[b] = (10.0 * math.log10(chunk.max() + _DB_FLOOR)
                    - 10.0 * math.log10(chunk.min() + _DB_FLOOR))
    contrast = float(spans.mean())

    return SpectralFeatures(contrast, kurtosis, skewness, entropy, centroid,
                            band_energies, n_bins)
