"""Deterministic synthetic echo generation.

Produces envelope-sampled acquisition frames for airborne ranging targets
and for contact with material slabs or filled containers. Amplitudes follow
a documented desk-scale model: spherical spreading for air paths and a
geometric reverberation train for contact, both scaled by pulse count and
linear receive gain. Every frame is reproducible from its scene seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .acoustics import LayerStack, MaterialRegistry, builtin_materials, reflection_coefficient
from .modes import SensorMode, TimingConfig

__all__ = [
    "EchoFrame",
    "SceneKind",
    "SceneSpec",
    "synthesize_air_echo",
    "synthesize_contact_echo",
    "envelope",
    "BLIND_TIME_S",
    "CARRIER_FREQ_HZ",
]

# Transmit ring-down masks round trips shorter than about 2.7 cm.
BLIND_TIME_S = 160e-6
RINGDOWN_TAU_S = 25e-6
CARRIER_FREQ_HZ = 1.0e6

# Amplitude model constants (volts per pulse per unit linear gain).
TX_SENSITIVITY_V = 1.0e-6      # air-path echo scale, divided by distance^2
RINGDOWN_AMPLITUDE_V = 1.0e-3  # transmit bleed-through at t = 0
CONTACT_SENSITIVITY_V = 4.0e-4
CONTACT_LOBE_SIGMA_S = 1.5e-6  # width of one contact echo lobe
CONTACT_ECHO_COUNT = 12        # reverberation train length
MIN_RANGE_M = 1.0e-3           # floor for the 1/d^2 law

# Intrinsic round-trip loss inside a reverberating medium. Unlisted solids
# fall back to the default; fluids are treated as lossless at this scale.
ECHO_DAMPING: dict[str, float] = {
    "iron": 0.97,
    "acrylic": 0.90,
    "nylon": 0.88,
    "wood": 0.80,
    "rubber": 0.75,
    "water": 1.0,
    "oil": 1.0,
    "air": 1.0,
}
ECHO_DAMPING_DEFAULT = 0.92


@dataclass(eq=False)
class EchoFrame:
    """One acquisition cycle's envelope samples.

    samples are non-negative volts at `sample_rate`; `t0` is the cycle start
    time in seconds since epoch.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float
    gain_db: float
    pulse_count: int
    mode: SensorMode

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.pulse_count < 1:
            raise ValueError("pulse_count must be >= 1")
        if np.any(self.samples < 0):
            raise ValueError("envelope samples must be non-negative")

    @property
    def times(self) -> np.ndarray:
        """Sample times relative to the cycle start, seconds."""
        return np.arange(self.samples.size) / self.sample_rate

    def to_csv_row(self) -> str:
        head = [repr(float(self.t0)), repr(float(self.sample_rate)),
                repr(float(self.gain_db)), str(self.pulse_count), self.mode.value]
        return ",".join(head + [repr(float(v)) for v in self.samples])

    @classmethod
    def from_csv_row(cls, row: str) -> "EchoFrame":
        parts = row.strip().split(",")
        t0, rate, gain = float(parts[0]), float(parts[1]), float(parts[2])
        pulses, mode = int(parts[3]), SensorMode(parts[4])
        samples = np.array([float(v) for v in parts[5:]])
        return cls(samples, rate, t0, gain, pulses, mode)


class SceneKind(Enum):
    AIR_TARGET = "air_target"
    CONTACT_SLAB = "contact_slab"
    CONTAINER = "container"


@dataclass(frozen=True)
class SceneSpec:
    """What the transducer is looking at for one synthetic frame.

    Air scenes need a distance and a target material (None for an empty
    scene). Slab scenes need the slab material and thickness; container
    scenes a wall material/thickness and a content material. Thicknesses
    may be `inf` to model a half-space.
    """

    kind: SceneKind
    distance_m: float = 0.0
    target: "str | None" = None
    slab: "str | None" = None
    slab_thickness_m: float = 0.02
    wall: "str | None" = None
    wall_thickness_m: float = 0.008
    content: "str | None" = None
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.distance_m < 0 or not math.isfinite(self.distance_m):
            raise ValueError("distance must be finite and >= 0")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.slab_thickness_m <= 0 or self.wall_thickness_m <= 0:
            raise ValueError("thicknesses must be positive")
        if self.kind is SceneKind.CONTACT_SLAB and self.slab is None:
            raise ValueError("contact slab scene needs a slab material")
        if self.kind is SceneKind.CONTAINER and (self.wall is None or self.content is None):
            raise ValueError("container scene needs wall and content materials")

    def with_seed(self, seed: int) -> "SceneSpec":
        return replace(self, seed=seed)

    def to_config(self) -> str:
        lines = [f"kind = {self.kind.value}"]
        if self.kind is SceneKind.AIR_TARGET:
            lines.append(f"distance_m = {self.distance_m!r}")
            lines.append(f"target = {self.target if self.target is not None else ''}")
        elif self.kind is SceneKind.CONTACT_SLAB:
            lines.append(f"slab = {self.slab}")
            lines.append(f"slab_thickness_m = {self.slab_thickness_m!r}")
        else:
            lines.append(f"wall = {self.wall}")
            lines.append(f"wall_thickness_m = {self.wall_thickness_m!r}")
            lines.append(f"content = {self.content}")
        lines.append(f"noise_std = {self.noise_std!r}")
        lines.append(f"seed = {self.seed}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text: str) -> "SceneSpec":
        kv: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
        kind = SceneKind(kv.pop("kind"))
        kwargs: dict = {"kind": kind}
        for key, value in kv.items():
            if key in ("target", "slab", "wall", "content"):
                kwargs[key] = value or None
            elif key == "seed":
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)


def _linear_gain(gain_db: float) -> float:
    return 10.0 ** (gain_db / 20.0)


def _base_frame(cfg: TimingConfig) -> tuple[np.ndarray, np.ndarray]:
    n = int(round(cfg.adc_rate_hz * cfg.acquisition_window_s))
    t = np.arange(n) / cfg.adc_rate_hz
    return t, np.zeros(n)


def _ringdown(t: np.ndarray, cfg: TimingConfig) -> np.ndarray:
    amp = RINGDOWN_AMPLITUDE_V * cfg.pulse_count * _linear_gain(cfg.gain_db)
    return amp * np.exp(-t / RINGDOWN_TAU_S)


def _finish(env: np.ndarray, scene: SceneSpec, cfg: TimingConfig, t0: float) -> EchoFrame:
    if scene.noise_std > 0:
        rng = np.random.default_rng(scene.seed)
        env = env + rng.normal(0.0, scene.noise_std, env.size)
    env = np.maximum(env, 0.0)
    return EchoFrame(env, cfg.adc_rate_hz, t0, cfg.gain_db, cfg.pulse_count, cfg.mode)


def synthesize_air_echo(scene: SceneSpec, cfg: TimingConfig,
                        registry: "MaterialRegistry | None" = None,
                        t0: float = 0.0) -> EchoFrame:
    """Envelope frame for an airborne target at `scene.distance_m`.

    The frame holds the transmit ring-down followed by a Gaussian echo lobe
    at the round-trip time 2 d / c_air, with amplitude scaled by the target
    reflection coefficient, pulse count, receive gain and 1/d^2 spreading.
    A `target` of None produces an empty-scene frame (ring-down only).
    """
    if scene.kind is not SceneKind.AIR_TARGET:
        raise ValueError("scene kind must be AIR_TARGET")
    reg = registry or builtin_materials()
    air = reg.lookup("air")

    t, env = _base_frame(cfg)
    env += _ringdown(t, cfg)

    if scene.target is not None:
        target = reg.lookup(scene.target)
        refl = abs(reflection_coefficient(air.impedance, target.impedance))
        t_echo = 2.0 * scene.distance_m / air.sound_speed
        sigma = cfg.pulse_count / (2.0 * CARRIER_FREQ_HZ)
        d_eff = max(scene.distance_m, MIN_RANGE_M)
        amp = (TX_SENSITIVITY_V * refl * cfg.pulse_count
               * _linear_gain(cfg.gain_db) / d_eff**2)
        env += amp * np.exp(-0.5 * ((t - t_echo) / sigma) ** 2)

    return _finish(env, scene, cfg, t0)


def synthesize_contact_echo(scene: SceneSpec, stack: LayerStack, cfg: TimingConfig,
                            registry: "MaterialRegistry | None" = None,
                            t0: float = 0.0) -> EchoFrame:
    """Envelope frame for contact with a slab or a filled container.

    The echo train has lobes at k * 2d/c of the reverberating medium (the
    slab itself, or the container wall) whose amplitudes fall off as
    |r_back|^k * (1 - r_front^2) * decay^k. The decay combines the internal
    front-interface reflection with the medium's intrinsic loss, so
    different materials and contents separate in both lobe spacing and
    decay rate.
    """
    if scene.kind not in (SceneKind.CONTACT_SLAB, SceneKind.CONTAINER):
        raise ValueError("scene kind must be CONTACT_SLAB or CONTAINER")
    reg = registry or builtin_materials()
    coupling = stack.outer_material()

    if scene.kind is SceneKind.CONTACT_SLAB:
        medium = reg.lookup(scene.slab)
        backing = reg.lookup("air")
        thickness = scene.slab_thickness_m
    else:
        medium = reg.lookup(scene.wall)
        backing = reg.lookup(scene.content)
        thickness = scene.wall_thickness_m

    r_front = reflection_coefficient(coupling.impedance, medium.impedance)
    r_back = reflection_coefficient(medium.impedance, backing.impedance)
    r_internal = reflection_coefficient(medium.impedance, coupling.impedance)
    loss = ECHO_DAMPING.get(medium.name.lower(), ECHO_DAMPING_DEFAULT)
    decay = abs(r_internal) * loss

    t, env = _base_frame(cfg)
    env += _ringdown(t, cfg)

    spacing = 2.0 * thickness / medium.sound_speed if math.isfinite(thickness) else math.inf
    base = CONTACT_SENSITIVITY_V * cfg.pulse_count * _linear_gain(cfg.gain_db)
    window = t[-1] + 4.0 * CONTACT_LOBE_SIGMA_S
    for k in range(1, CONTACT_ECHO_COUNT + 1):
        t_k = k * spacing
        if not math.isfinite(t_k) or t_k > window:
            break
        amp = base * (1.0 - r_front**2) * abs(r_back) ** k * decay**k
        if amp <= 0.0:
            break
        env += amp * np.exp(-0.5 * ((t - t_k) / CONTACT_LOBE_SIGMA_S) ** 2)

    return _finish(env, scene, cfg, t0)


def envelope(raw: np.ndarray, sample_rate: float = 2.4e6,
             cutoff_hz: float = 100e3) -> np.ndarray:
    """Rectify a signed signal and smooth it with a single-pole low-pass.

    Output has the same length as the input and is non-negative everywhere.
    """
    x = np.abs(np.asarray(raw, dtype=np.float64))
    if x.size == 0:
        return x
    alpha = math.exp(-2.0 * math.pi * cutoff_hz / sample_rate)
    out = np.empty_like(x)
    acc = x[0]
    out[0] = acc
    one_minus = 1.0 - alpha
    for i in range(1, x.size):
        acc = alpha * acc + one_minus * x[i]
        out[i] = acc
    return out
