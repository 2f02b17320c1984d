"""Touch-triggered dual-pathway controller.

Owns the proximity/material mode state machine (transitions only at 20 ms
cycle boundaries), the 50 Hz / 30 Hz stream synchronizer, and the scripted
timeline runner used by the content-inspection experiment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .acoustics import MaterialRegistry, builtin_materials, default_sensor_stack
from .echo import EchoFrame, SceneKind, SceneSpec, synthesize_air_echo, synthesize_contact_echo
from .gbdt import GBDTModel, predict
from .modes import CYCLE_PERIOD_S, SensorMode, TimingConfig
from .pipeline import (KalmanDenoiser, KalmanParams, capture_reference,
                       estimate_distance, kalman_filter, spectral_features)
from .texture import render_pattern, texture_features

__all__ = [
    "TactileFrame",
    "SyncedPair",
    "detect_touch",
    "step_mode",
    "ModeController",
    "sync_streams",
    "ScenarioStep",
    "load_scenario",
    "save_scenario",
    "build_container_scenario",
    "TimelineModels",
    "LogEvent",
    "TimelineResult",
    "run_timeline",
    "CAMERA_PERIOD_S",
    "DEFAULT_TOUCH_THRESHOLD",
]

CAMERA_PERIOD_S = 1.0 / 30.0
DEFAULT_TOUCH_THRESHOLD = 0.02
CAMERA_STALL_PERIODS = 3


@dataclass
class TactileFrame:
    """One camera frame: grayscale image in [0, 1] plus its timestamp."""

    image: np.ndarray
    timestamp: float
    contact_score: float = 0.0

    def __post_init__(self) -> None:
        self.image = np.asarray(self.image, dtype=np.float64)
        if self.image.ndim != 2 or self.image.size == 0:
            raise ValueError("image must be a non-empty 2-D array")


@dataclass
class SyncedPair:
    ultrasound: EchoFrame
    tactile: "TactileFrame | None"
    skew: float
    paired: bool = True


def detect_touch(frame: TactileFrame, baseline: TactileFrame,
                 threshold: float = DEFAULT_TOUCH_THRESHOLD) -> bool:
    """Contact iff the mean absolute difference to the baseline exceeds
    the threshold. The score is stored on the frame."""
    if frame.image.shape != baseline.image.shape:
        raise ValueError("frame and baseline dimensions differ")
    score = float(np.mean(np.abs(frame.image - baseline.image)))
    frame.contact_score = score
    return score > threshold


def step_mode(state: SensorMode, touch: bool) -> tuple[SensorMode, TimingConfig]:
    """Pure transition function: touch selects material detection."""
    mode = SensorMode.MATERIAL_DETECTION if touch else SensorMode.PROXIMITY
    return mode, TimingConfig.for_mode(mode)


class ModeController:
    """Applies mode switches only at cycle boundaries.

    Touch observations may arrive at any time; the most recent one is
    sampled when a boundary is reached, so a switch lags the trigger by at
    most one cycle (more with debounce_cycles > 1).
    """

    def __init__(self, cycle_period_s: float = CYCLE_PERIOD_S,
                 debounce_cycles: int = 1,
                 initial: SensorMode = SensorMode.PROXIMITY):
        if debounce_cycles < 1:
            raise ValueError("debounce_cycles must be >= 1")
        self.cycle_period_s = cycle_period_s
        self.debounce_cycles = debounce_cycles
        self.mode = initial
        self.timing = TimingConfig.for_mode(initial)
        self._touch = False
        self._streak = 0

    def observe_touch(self, touch: bool) -> None:
        self._touch = bool(touch)

    def on_cycle_boundary(self, t: float) -> tuple[SensorMode, TimingConfig, bool]:
        """Commit any pending switch; returns (mode, timing, transitioned)."""
        desired, timing = step_mode(self.mode, self._touch)
        if desired is self.mode:
            self._streak = 0
            return self.mode, self.timing, False
        self._streak += 1
        if self._streak < self.debounce_cycles:
            return self.mode, self.timing, False
        self.mode = desired
        self.timing = timing
        self._streak = 0
        return self.mode, self.timing, True


def sync_streams(us_frames, cam_frames,
                 cam_period_s: float = CAMERA_PERIOD_S,
                 stall_periods: int = CAMERA_STALL_PERIODS) -> list[SyncedPair]:
    """Pair every ultrasound frame with its nearest camera frame.

    Candidates are frames already arrived plus a look-ahead of one camera
    period; ties go to the earlier camera frame. Frames whose nearest
    candidate is farther than `stall_periods` camera periods come back
    unpaired (camera stall), so the output length always equals the
    ultrasound input length.
    """
    cam_list = list(cam_frames)
    cam_times = np.array([c.timestamp for c in cam_list])
    pairs: list[SyncedPair] = []
    for us in us_frames:
        t = us.t0
        best = None
        if cam_list:
            idx = int(np.searchsorted(cam_times, t, side="right"))
            for j in (idx - 1, idx):
                if j < 0 or j >= len(cam_list):
                    continue
                if cam_times[j] > t + cam_period_s:
                    continue  # beyond the look-ahead bound
                dt = abs(t - cam_times[j])
                if best is None or dt < best[0] - 1e-12:
                    best = (dt, j)
        if best is None or best[0] > stall_periods * cam_period_s:
            pairs.append(SyncedPair(us, None, math.nan, paired=False))
        else:
            j = best[1]
            pairs.append(SyncedPair(us, cam_list[j], t - cam_times[j]))
    return pairs


# ---------------------------------------------------------------------------
# Scripted timelines


@dataclass(frozen=True)
class ScenarioStep:
    """State of the scene from this time until the next step."""

    time_ms: float
    distance_m: float = 0.0
    contact: bool = False
    content: "str | None" = None
    pattern: "str | None" = None


def save_scenario(steps, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("time_ms,distance_m,contact,content,pattern\n")
        for s in steps:
            fh.write(f"{s.time_ms!r},{s.distance_m!r},{int(s.contact)},"
                     f"{s.content or ''},{s.pattern or ''}\n")


def load_scenario(path) -> list[ScenarioStep]:
    steps = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("time_ms"):
            raise ValueError("scenario file must start with its header row")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t, d, c, content, pattern = line.split(",")
            steps.append(ScenarioStep(float(t), float(d), bool(int(c)),
                                      content or None, pattern or None))
    return sorted(steps, key=lambda s: s.time_ms)


def build_container_scenario(pattern: str, content: str,
                             approach_start_m: float = 0.08,
                             approach_end_m: float = 0.03,
                             contact_time_s: float = 2.0,
                             duration_s: float = 5.0,
                             step_s: float = CYCLE_PERIOD_S) -> list[ScenarioStep]:
    """Approach from `approach_start_m`, touch at `contact_time_s`, hold
    through the end (grasp-and-carry)."""
    steps = []
    t = 0.0
    while t < duration_s - 1e-9:
        if t < contact_time_s:
            frac = t / contact_time_s
            d = approach_start_m + frac * (approach_end_m - approach_start_m)
            steps.append(ScenarioStep(t * 1000.0, d, False, content, pattern))
        else:
            steps.append(ScenarioStep(t * 1000.0, 0.0, True, content, pattern))
        t += step_s
    return steps


@dataclass
class TimelineModels:
    """Trained classifiers the timeline uses during the touch phase."""

    content_model: GBDTModel
    pattern_model: GBDTModel
    n_bands: int = 8
    denoise_floor: float = 0.15


@dataclass(frozen=True)
class LogEvent:
    time_ms: float
    mode: SensorMode
    pulse_count: int
    event: str
    payload: str

    def to_csv_row(self) -> str:
        return (f"{self.time_ms!r},{self.mode.value},{self.pulse_count},"
                f"{self.event},{self.payload}")


@dataclass
class TimelineResult:
    events: list[LogEvent]
    transitions: list[float]
    distances: list[tuple[float, float]]
    pattern_votes: dict[str, int]
    content_votes: dict[str, int]
    verdict: "tuple[str, str] | None"
    status: str
    pairs: list[SyncedPair]

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("time_ms,mode,pulse_count,event,payload\n")
            for ev in self.events:
                fh.write(ev.to_csv_row() + "\n")


def _scenario_state(steps: list[ScenarioStep], t_s: float) -> ScenarioStep:
    state = steps[0]
    for s in steps:
        if s.time_ms <= t_s * 1000.0 + 1e-9:
            state = s
        else:
            break
    return state


def _majority(votes: dict) -> "str | None":
    if not votes:
        return None
    return max(sorted(votes), key=lambda k: votes[k])


def run_timeline(scenario, models: "TimelineModels | None" = None, *,
                 seed: int = 0, noise_std: float = 0.02, image_noise: float = 0.01,
                 image_size: int = 64, wall_material: str = "acrylic",
                 wall_thickness_m: float = 0.008,
                 registry: "MaterialRegistry | None" = None,
                 n_reference_frames: int = 20,
                 touch_threshold: float = DEFAULT_TOUCH_THRESHOLD,
                 debounce_cycles: int = 1) -> TimelineResult:
    """Replay a scripted approach/touch/take sequence through the full stack.

    Proximity cycles produce ranging estimates against a reference captured
    at start-up; the touch trigger switches the next cycle into material
    detection, where echo features feed the content classifier while camera
    frames feed the pattern classifier. Deterministic for a fixed scenario,
    seed and model set.
    """
    steps = sorted(scenario, key=lambda s: s.time_ms)
    if not steps:
        raise ValueError("scenario must define at least one step")
    reg = registry or builtin_materials()
    stack = default_sensor_stack(registry=reg)

    seq = np.random.SeedSequence(seed)
    ref_seeds, us_seeds, cam_seed = seq.spawn(3)
    cam_rng = np.random.default_rng(cam_seed)

    timing_prox = TimingConfig.proximity()
    empty = SceneSpec(SceneKind.AIR_TARGET, target=None, noise_std=noise_std)
    ref_frames = [synthesize_air_echo(empty.with_seed(int(s.generate_state(1)[0])), timing_prox, reg)
                  for s in ref_seeds.spawn(n_reference_frames)]
    kalman = KalmanParams(process_noise_q=max(noise_std, 1e-6) ** 2 / 4.0,
                          measurement_noise_r=max(noise_std, 1e-6) ** 2)
    reference = capture_reference(list(kalman_filter(ref_frames, kalman)))
    live_denoiser = KalmanDenoiser(kalman)

    duration_s = steps[-1].time_ms / 1000.0 + CYCLE_PERIOD_S
    n_cycles = int(round(duration_s / CYCLE_PERIOD_S))
    cam_times = [j * CAMERA_PERIOD_S for j in range(int(duration_s / CAMERA_PERIOD_S) + 1)]
    baseline = TactileFrame(np.zeros((image_size, image_size)), timestamp=-1.0)
    pattern_rotation = float(cam_rng.uniform(0.0, 360.0))

    controller = ModeController(debounce_cycles=debounce_cycles)
    events: list[LogEvent] = []
    transitions: list[float] = []
    distances: list[tuple[float, float]] = []
    pattern_votes: dict[str, int] = {}
    content_votes: dict[str, int] = {}
    us_frames: list[EchoFrame] = []
    cam_frames: list[TactileFrame] = []
    scene_seeds = iter(int(s.generate_state(1)[0]) for s in us_seeds.spawn(n_cycles))

    cam_idx = 0
    for k in range(n_cycles):
        t = k * CYCLE_PERIOD_S
        mode, timing, transitioned = controller.on_cycle_boundary(t)
        if transitioned:
            transitions.append(t)
            live_denoiser = KalmanDenoiser(kalman)  # front-end reconfigured
            events.append(LogEvent(t * 1000.0, mode, timing.pulse_count,
                                   "mode_transition", mode.value))
        state = _scenario_state(steps, t)

        # camera frames falling inside this cycle
        while cam_idx < len(cam_times) and cam_times[cam_idx] < t + CYCLE_PERIOD_S - 1e-12:
            tc = cam_times[cam_idx]
            cam_state = _scenario_state(steps, tc)
            if cam_state.contact and cam_state.pattern is not None:
                img = render_pattern(cam_state.pattern, size=image_size,
                                     rotation_deg=pattern_rotation)
            else:
                img = np.zeros((image_size, image_size))
            if image_noise > 0:
                img = np.clip(img + cam_rng.normal(0.0, image_noise, img.shape), 0.0, 1.0)
            frame = TactileFrame(img, timestamp=tc)
            touched = detect_touch(frame, baseline, touch_threshold)
            controller.observe_touch(touched)
            cam_frames.append(frame)
            if touched and models is not None and cam_state.pattern is not None:
                feats = texture_features(frame.image, denoise_floor=models.denoise_floor)
                if not feats.degenerate:
                    label, _ = predict(models.pattern_model, feats.values)
                    pattern_votes[label] = pattern_votes.get(label, 0) + 1
                    events.append(LogEvent(tc * 1000.0, mode, timing.pulse_count,
                                           "pattern_prediction", label))
            cam_idx += 1

        scene_seed = next(scene_seeds)
        if mode is SensorMode.PROXIMITY:
            scene = SceneSpec(SceneKind.AIR_TARGET, distance_m=state.distance_m,
                              target=wall_material if not state.contact else None,
                              noise_std=noise_std, seed=scene_seed)
            frame = synthesize_air_echo(scene, timing, reg, t0=t)
            est = estimate_distance(live_denoiser.process(frame), reference)
            if est.valid:
                distances.append((t, est.distance_m))
                events.append(LogEvent(t * 1000.0, mode, timing.pulse_count,
                                       "distance_estimate", repr(est.distance_m)))
            else:
                events.append(LogEvent(t * 1000.0, mode, timing.pulse_count,
                                       "no_target", ""))
        else:
            content = state.content or "air"
            scene = SceneSpec(SceneKind.CONTAINER, wall=wall_material,
                              wall_thickness_m=wall_thickness_m, content=content,
                              noise_std=noise_std, seed=scene_seed)
            frame = synthesize_contact_echo(scene, stack, timing, reg, t0=t)
            if models is not None:
                feats = spectral_features(frame, n_bands=models.n_bands)
                label, _ = predict(models.content_model, feats.to_vector())
                content_votes[label] = content_votes.get(label, 0) + 1
                events.append(LogEvent(t * 1000.0, mode, timing.pulse_count,
                                       "content_prediction", label))
        us_frames.append(frame)

    pattern = _majority(pattern_votes)
    content = _majority(content_votes)
    if pattern is not None and content is not None:
        verdict: "tuple[str, str] | None" = (pattern, content)
        status = "complete"
    else:
        verdict = None
        status = "incomplete"
        events.append(LogEvent(n_cycles * CYCLE_PERIOD_S * 1000.0,
                               controller.mode, controller.timing.pulse_count,
                               "verdict_withheld", status))

    pairs = sync_streams(us_frames, cam_frames)
    return TimelineResult(events, transitions, distances, pattern_votes,
                          content_votes, verdict, status, pairs)
