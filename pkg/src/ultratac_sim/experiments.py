"""Experiment harness: proximity ranging, material classification,
dual-modal recognition and container content inspection on synthetic data.

Every run is reproducible from (config, seed): per-trial generators are
spawned deterministically from the master seed and results are aggregated
in a fixed order, so repeated runs produce byte-identical CSV files.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .acoustics import builtin_materials, default_sensor_stack
from .controller import TimelineModels, build_container_scenario, run_timeline
from .dataset import ConfusionMatrix, Dataset
from .echo import SceneKind, SceneSpec, synthesize_air_echo, synthesize_contact_echo
from .gbdt import evaluate, predict_labels, train_gbdt
from .modes import TimingConfig
from .pca import pca_fit, pca_transform
from .pipeline import (KalmanParams, SpectralFeatures, capture_reference,
                       estimate_distance, kalman_filter, spectral_features)
from .texture import PATTERN_NAMES, build_pattern_dataset

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ProximityResult",
    "MaterialResult",
    "DualModalResult",
    "InspectionResult",
    "run_proximity",
    "run_material",
    "run_dualmodal",
    "run_inspection",
    "run_experiment",
    "EXPERIMENT_NAMES",
]

EXPERIMENT_NAMES = ("proximity", "material", "dualmodal", "inspection")
THREADS_ENV = "ULTRATAC_SIM_THREADS"

_PROXIMITY_MATERIALS = ("acrylic", "iron", "nylon", "resin", "wood")
_MATERIAL_MATERIALS = ("acrylic", "iron", "nylon", "rubber", "wood")
_DUALMODAL_MATERIALS = ("iron", "nylon", "plastic")
_INSPECTION_PATTERNS = ("circle", "rectangle", "hexagon")
_DEFAULT_DISTANCES_M = tuple(np.round(np.arange(0.030, 0.0801, 0.005), 6))


class ConfigError(ValueError):
    """Invalid experiment configuration; reported before any run starts."""


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 42
    trials: int = 10
    noise_std: float = 0.02
    output_dir: "str | None" = None
    materials: tuple = ()
    distances_m: tuple = _DEFAULT_DISTANCES_M
    patterns: tuple = PATTERN_NAMES
    contents: tuple = ("air", "water", "oil")
    samples_per_class: int = 200
    slab_thickness_m: float = 0.02
    wall_material: str = "acrylic"
    wall_thickness_m: float = 0.008
    n_bands: int = 8
    n_reference_frames: int = 20
    image_noise: float = 0.05
    timeline_image_noise: float = 0.01
    gbdt_rounds: int = 100
    gbdt_depth: int = 3
    gbdt_learning_rate: float = 0.1
    train_fraction: float = 0.8
    sample_interval_s: float = 0.1

    @classmethod
    def default(cls, experiment: str, **overrides) -> "ExperimentConfig":
        if experiment not in EXPERIMENT_NAMES:
            raise ConfigError(f"unknown experiment: {experiment!r}")
        base: dict = {"experiment": experiment}
        if experiment == "proximity":
            base["materials"] = _PROXIMITY_MATERIALS
        elif experiment == "material":
            base["materials"] = _MATERIAL_MATERIALS
        elif experiment == "dualmodal":
            base["materials"] = _DUALMODAL_MATERIALS
        else:
            base["materials"] = ()
            base["patterns"] = _INSPECTION_PATTERNS
        base.update(overrides)
        cfg = cls(**base)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.experiment not in EXPERIMENT_NAMES:
            raise ConfigError(f"unknown experiment: {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        registry = builtin_materials()
        for name in list(self.materials) + [self.wall_material] + list(self.contents):
            if name and name not in registry:
                raise ConfigError(f"unknown material: {name!r}")
        if self.experiment == "proximity":
            if len(self.materials) < 2:
                raise ConfigError("proximity needs at least two materials")
            if not self.distances_m:
                raise ConfigError("proximity needs a distance grid")
            for d in self.distances_m:
                if not 0.03 - 1e-9 <= d <= 0.08 + 1e-9:
                    raise ConfigError("distance grid must stay within 3..8 cm")
        elif self.experiment == "material":
            if len(self.materials) < 2:
                raise ConfigError("material classification needs at least two classes")
            if self.samples_per_class < 50:
                raise ConfigError("need at least 50 samples per class")
        elif self.experiment == "dualmodal":
            if len(self.materials) < 2 or len(self.patterns) < 2:
                raise ConfigError("dual-modal needs at least two materials and two patterns")
            if self.samples_per_class < 50:
                raise ConfigError("need at least 50 samples per class")
        else:
            if not self.contents or not self.patterns:
                raise ConfigError("inspection needs contents and patterns")

    def apply_file(self, path) -> "ExperimentConfig":
        """Override fields from a plain-text `key = value` config file."""
        cfg = self
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                cfg = cfg.with_option(key.strip(), value.strip())
        return cfg

    def with_option(self, key: str, value: str) -> "ExperimentConfig":
        coercers = {
            "seed": int, "trials": int, "samples_per_class": int,
            "n_bands": int, "n_reference_frames": int, "gbdt_rounds": int,
            "gbdt_depth": int,
            "noise_std": float, "slab_thickness_m": float,
            "wall_thickness_m": float, "image_noise": float,
            "timeline_image_noise": float, "gbdt_learning_rate": float,
            "train_fraction": float, "sample_interval_s": float,
            "experiment": str, "output_dir": str, "wall_material": str,
            "materials": _parse_name_list, "patterns": _parse_name_list,
            "contents": _parse_name_list,
            "distances_cm": _parse_distance_grid_cm,
        }
        if key not in coercers:
            raise ConfigError(f"unknown config key: {key!r}")
        parsed = coercers[key](value)
        if key == "distances_cm":
            return replace(self, distances_m=parsed)
        return replace(self, **{key: parsed})

    def describe(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _parse_name_list(value: str) -> tuple:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _parse_distance_grid_cm(value: str) -> tuple:
    if ":" in value:
        start, stop, step = (float(v) for v in value.split(":"))
        n = int(round((stop - start) / step)) + 1
        grid = [start + i * step for i in range(n)]
    else:
        grid = [float(v) for v in value.split(",")]
    return tuple(np.round(np.array(grid) / 100.0, 9))


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    threads = _thread_count()
    if threads == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _child_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1)[0])


def _kalman_for_noise(noise_std: float) -> KalmanParams:
    r = max(noise_std, 1e-6) ** 2
    return KalmanParams(process_noise_q=r / 4.0, measurement_noise_r=r)


def _unique_labels(names) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for name in names:
        seen[name] = seen.get(name, 0) + 1
        out.append(name if seen[name] == 1 else f"{name}_{seen[name]}")
    return out


# ---------------------------------------------------------------------------
# Proximity


@dataclass
class ProximityResult:
    rows: list
    slope: float
    intercept: float
    r2: float
    per_point: list
    max_point_error_m: float


def run_proximity(cfg: ExperimentConfig, write: bool = True) -> ProximityResult:
    """Sweep the distance grid for every material; fit estimated vs actual."""
    cfg.validate()
    if cfg.experiment != "proximity":
        raise ConfigError("config is not a proximity config")
    registry = builtin_materials()
    timing = TimingConfig.proximity()
    kalman = _kalman_for_noise(cfg.noise_std)

    seq = np.random.SeedSequence(cfg.seed)
    ref_seq, sweep_seq = seq.spawn(2)
    empty = SceneSpec(SceneKind.AIR_TARGET, target=None, noise_std=cfg.noise_std)
    ref_frames = [synthesize_air_echo(empty.with_seed(_child_seed(s)), timing, registry)
                  for s in ref_seq.spawn(cfg.n_reference_frames)]
    reference = capture_reference(list(kalman_filter(ref_frames, kalman)))

    points = [(mat, d) for mat in cfg.materials for d in cfg.distances_m]
    point_seqs = sweep_seq.spawn(len(points))

    def run_point(args):
        (mat, dist), point_seq = args
        scenes = [SceneSpec(SceneKind.AIR_TARGET, distance_m=dist, target=mat,
                            noise_std=cfg.noise_std, seed=_child_seed(s))
                  for s in point_seq.spawn(cfg.trials)]
        frames = [synthesize_air_echo(sc, timing, registry) for sc in scenes]
        out = []
        for trial, frame in enumerate(kalman_filter(frames, kalman)):
            est = estimate_distance(frame, reference)
            out.append((mat, dist, trial, est))
        return out

    rows = []
    for chunk in _map_ordered(run_point, list(zip(points, point_seqs))):
        rows.extend(chunk)

    actual = np.array([r[1] for r in rows if r[3].valid])
    est = np.array([r[3].distance_m for r in rows if r[3].valid])
    if actual.size < 2:
        raise RuntimeError("too few valid estimates to fit")
    slope, intercept = np.polyfit(actual, est, 1)
    fitted = slope * actual + intercept
    ss_res = float(((est - fitted) ** 2).sum())
    ss_tot = float(((est - est.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    per_point = []
    max_err = 0.0
    for mat in cfg.materials:
        for dist in cfg.distances_m:
            ests = np.array([r[3].distance_m for r in rows
                             if r[0] == mat and r[1] == dist and r[3].valid])
            if ests.size == 0:
                per_point.append((mat, dist, np.nan, np.nan, np.nan, np.nan, np.nan))
                continue
            mean_err = float(np.mean(np.abs(ests - dist)))
            max_err = max(max_err, mean_err)
            per_point.append((mat, dist, float(ests.mean()), mean_err,
                              float(ests.std()), float(ests.min()), float(ests.max())))

    result = ProximityResult(rows, float(slope), float(intercept), float(r2),
                             per_point, max_err)
    if write and cfg.output_dir:
        _write_proximity(cfg, result)
    return result


def _write_proximity(cfg: ExperimentConfig, res: ProximityResult) -> None:
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    _write_csv(os.path.join(out, "proximity_points.csv"),
               "material,actual_m,trial,estimate_m,error_m,peak_time_s,peak_amplitude_v,valid",
               (f"{m},{_fmt(d)},{t},{_fmt(e.distance_m)},{_fmt(e.distance_m - d)},"
                f"{_fmt(e.peak_time_s)},{_fmt(e.peak_amplitude)},{int(e.valid)}"
                for m, d, t, e in res.rows))
    _write_csv(os.path.join(out, "proximity_per_point.csv"),
               "material,actual_m,mean_estimate_m,mean_abs_error_m,std_m,min_m,max_m",
               (",".join([m, _fmt(d)] + [_fmt(v) for v in vals])
                for m, d, *vals in res.per_point))
    _write_csv(os.path.join(out, "proximity_stats.csv"),
               "slope,intercept_m,r2,max_point_mean_abs_error_m",
               [f"{_fmt(res.slope)},{_fmt(res.intercept)},{_fmt(res.r2)},"
                f"{_fmt(res.max_point_error_m)}"])
    with open(os.path.join(out, "config.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.describe())
    from .plotting import plot_proximity_fit
    valid = [r for r in res.rows if r[3].valid]
    plot_proximity_fit(os.path.join(out, "proximity_fit.svg"),
                       [100 * r[1] for r in valid],
                       [100 * r[3].distance_m for r in valid],
                       [r[0] for r in valid],
                       res.slope, 100 * res.intercept, res.r2)


# ---------------------------------------------------------------------------
# Material classification


@dataclass
class MaterialResult:
    dataset: Dataset
    confusion: ConfusionMatrix
    accuracy: float
    pca_ratios: np.ndarray
    pca_points: np.ndarray
    confusable: list


def _material_features(cfg: ExperimentConfig, materials, labels_for, seq) -> Dataset:
    """Contact-slab feature dataset: one echo frame per sample."""
    registry = builtin_materials()
    stack = default_sensor_stack(registry=registry)
    timing = TimingConfig.material_detection()
    class_seqs = seq.spawn(len(materials))

    def run_class(args):
        cls, (gen_material, class_seq) = args
        scenes = [SceneSpec(SceneKind.CONTACT_SLAB, slab=gen_material,
                            slab_thickness_m=cfg.slab_thickness_m,
                            noise_std=cfg.noise_std, seed=_child_seed(s))
                  for s in class_seq.spawn(cfg.samples_per_class)]
        feats = []
        for i, scene in enumerate(scenes):
            frame = synthesize_contact_echo(scene, stack, timing, registry,
                                            t0=i * cfg.sample_interval_s)
            feats.append(spectral_features(frame, n_bands=cfg.n_bands).to_vector())
        return cls, feats

    results = _map_ordered(run_class, list(enumerate(zip(materials, class_seqs))))
    rows, labels = [], []
    for cls, feats in sorted(results, key=lambda r: r[0]):
        rows.extend(feats)
        labels.extend([cls] * len(feats))
    names = SpectralFeatures.vector_names(cfg.n_bands)
    return Dataset(np.array(rows), np.array(labels), labels_for,
                   split_seed=cfg.seed, feature_names=names)


def run_material(cfg: ExperimentConfig, write: bool = True) -> MaterialResult:
    """Default five-class slab study: features, 8:2 split, boosted trees, PCA."""
    cfg.validate()
    if cfg.experiment != "material":
        raise ConfigError("config is not a material config")
    label_names = _unique_labels(cfg.materials)
    seq = np.random.SeedSequence(cfg.seed)
    data_seq, = seq.spawn(1)
    dataset = _material_features(cfg, list(cfg.materials), label_names, data_seq)

    train, test = dataset.stratified_split(cfg.train_fraction, seed=cfg.seed)
    model = train_gbdt(train, n_rounds=cfg.gbdt_rounds, max_depth=cfg.gbdt_depth,
                       learning_rate=cfg.gbdt_learning_rate, seed=cfg.seed)
    confusion = evaluate(model, test)

    standardized = _standardize(dataset.features)
    proj = pca_fit(standardized, k=2)
    points = pca_transform(proj, standardized)

    result = MaterialResult(dataset, confusion, confusion.accuracy,
                            proj.explained_variance_ratios, points,
                            confusion.confusable_pairs())
    if write and cfg.output_dir:
        _write_material(cfg, result)
    return result


def _standardize(X: np.ndarray) -> np.ndarray:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return (X - mean) / np.where(std > 1e-12, std, 1.0)


def _write_material(cfg: ExperimentConfig, res: MaterialResult) -> None:
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    res.dataset.to_csv(os.path.join(out, "material_features.csv"))
    res.confusion.to_csv(os.path.join(out, "material_confusion.csv"))
    _write_csv(os.path.join(out, "material_pca.csv"),
               "label,pc1,pc2",
               (f"{res.dataset.label_names[lab]},{_fmt(p[0])},{_fmt(p[1])}"
                for p, lab in zip(res.pca_points, res.dataset.labels)))
    summary = [f"accuracy,{_fmt(res.accuracy)}",
               "pca_ratios," + ",".join(_fmt(r) for r in res.pca_ratios)]
    for a, b, rate in res.confusable:
        summary.append(f"confusable_pair,{a},{b},{_fmt(rate)}")
    _write_csv(os.path.join(out, "material_summary.csv"), "key,value", summary)
    with open(os.path.join(out, "config.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.describe())
    from .plotting import plot_confusion, plot_pca_scatter
    plot_confusion(os.path.join(out, "material_confusion.svg"),
                   res.confusion.counts, res.confusion.label_names, res.accuracy)
    plot_pca_scatter(os.path.join(out, "material_pca.svg"), res.pca_points,
                     res.dataset.labels, res.dataset.label_names, res.pca_ratios)


# ---------------------------------------------------------------------------
# Dual-modal


@dataclass
class DualModalResult:
    confusion: ConfusionMatrix
    accuracy: float
    material_accuracy: float
    pattern_accuracy: float
    errors_within_material: int
    errors_across_material: int


def run_dualmodal(cfg: ExperimentConfig, write: bool = True) -> DualModalResult:
    """Joint (material, pattern) recognition over the 15-class default grid."""
    cfg.validate()
    if cfg.experiment != "dualmodal":
        raise ConfigError("config is not a dualmodal config")
    registry = builtin_materials()
    stack = default_sensor_stack(registry=registry)
    timing = TimingConfig.material_detection()
    materials = list(cfg.materials)
    patterns = list(cfg.patterns)
    joint_names = [f"{m}/{p}" for m in materials for p in patterns]

    seq = np.random.SeedSequence(cfg.seed)
    echo_seq, image_seq, split_seq = seq.spawn(3)
    echo_seqs = echo_seq.spawn(len(joint_names))
    image_rng = np.random.default_rng(image_seq)

    from .texture import augment_pattern, texture_features

    echo_rows, tex_rows, joint_labels = [], [], []
    for ji, (m_idx, p_idx) in enumerate((mi, pi) for mi in range(len(materials))
                                        for pi in range(len(patterns))):
        class_seq = echo_seqs[ji]
        for i, s in enumerate(class_seq.spawn(cfg.samples_per_class)):
            scene = SceneSpec(SceneKind.CONTACT_SLAB, slab=materials[m_idx],
                              slab_thickness_m=cfg.slab_thickness_m,
                              noise_std=cfg.noise_std, seed=_child_seed(s))
            frame = synthesize_contact_echo(scene, stack, timing, registry,
                                            t0=i * cfg.sample_interval_s)
            echo_rows.append(spectral_features(frame, n_bands=cfg.n_bands).to_vector())
            img = augment_pattern(patterns[p_idx], image_rng,
                                  noise_std=cfg.image_noise)
            tex_rows.append(texture_features(img, denoise_floor=0.15).values)
            joint_labels.append(ji)

    echo_rows = np.array(echo_rows)
    tex_rows = np.array(tex_rows)
    joint_labels = np.array(joint_labels)

    joint = Dataset(np.arange(len(joint_labels))[:, None].astype(float),
                    joint_labels, joint_names, split_seed=cfg.seed)
    train_sel, test_sel = joint.stratified_split(cfg.train_fraction, seed=cfg.seed)
    train_idx = train_sel.features[:, 0].astype(int)
    test_idx = test_sel.features[:, 0].astype(int)

    n_pat = len(patterns)
    mat_of = joint_labels // n_pat
    pat_of = joint_labels % n_pat

    mat_train = Dataset(echo_rows[train_idx], mat_of[train_idx], materials)
    pat_train = Dataset(tex_rows[train_idx], pat_of[train_idx], patterns)
    mat_model = train_gbdt(mat_train, n_rounds=cfg.gbdt_rounds,
                           max_depth=cfg.gbdt_depth,
                           learning_rate=cfg.gbdt_learning_rate, seed=cfg.seed)
    pat_model = train_gbdt(pat_train, n_rounds=cfg.gbdt_rounds,
                           max_depth=cfg.gbdt_depth,
                           learning_rate=cfg.gbdt_learning_rate, seed=cfg.seed)

    mat_pred = predict_labels(mat_model, echo_rows[test_idx])
    pat_pred = predict_labels(pat_model, tex_rows[test_idx])
    joint_pred = mat_pred * n_pat + pat_pred
    joint_true = joint_labels[test_idx]

    k = len(joint_names)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (joint_true, joint_pred), 1)
    confusion = ConfusionMatrix(counts, joint_names)

    mat_true = mat_of[test_idx]
    pat_true = pat_of[test_idx]
    errors = joint_pred != joint_true
    within = int(np.sum(errors & (mat_pred == mat_true)))
    across = int(np.sum(errors & (mat_pred != mat_true)))

    result = DualModalResult(
        confusion, confusion.accuracy,
        float(np.mean(mat_pred == mat_true)),
        float(np.mean(pat_pred == pat_true)),
        within, across)
    if write and cfg.output_dir:
        _write_dualmodal(cfg, result)
    return result


def _write_dualmodal(cfg: ExperimentConfig, res: DualModalResult) -> None:
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    res.confusion.to_csv(os.path.join(out, "dualmodal_confusion.csv"))
    _write_csv(os.path.join(out, "dualmodal_summary.csv"), "key,value", [
        f"accuracy,{_fmt(res.accuracy)}",
        f"material_accuracy,{_fmt(res.material_accuracy)}",
        f"pattern_accuracy,{_fmt(res.pattern_accuracy)}",
        f"errors_within_material,{res.errors_within_material}",
        f"errors_across_material,{res.errors_across_material}",
    ])
    with open(os.path.join(out, "config.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.describe())
    from .plotting import plot_confusion
    plot_confusion(os.path.join(out, "dualmodal_confusion.svg"),
                   res.confusion.counts, res.confusion.label_names, res.accuracy)


# ---------------------------------------------------------------------------
# Content inspection


@dataclass
class InspectionResult:
    verdicts: list
    n_correct: int
    timelines: list


def run_inspection(cfg: ExperimentConfig, write: bool = True) -> InspectionResult:
    """Train content/pattern models, then run the nine-container timeline set."""
    cfg.validate()
    if cfg.experiment != "inspection":
        raise ConfigError("config is not an inspection config")
    registry = builtin_materials()
    stack = default_sensor_stack(registry=registry)
    timing = TimingConfig.material_detection()
    contents = list(cfg.contents)
    patterns = list(cfg.patterns)

    seq = np.random.SeedSequence(cfg.seed)
    content_seq, pattern_seed_seq, timeline_seq = seq.spawn(3)

    # content training set: container echoes per content
    class_seqs = content_seq.spawn(len(contents))
    rows, labels = [], []
    for cls, (content, class_seq) in enumerate(zip(contents, class_seqs)):
        for i, s in enumerate(class_seq.spawn(cfg.samples_per_class)):
            scene = SceneSpec(SceneKind.CONTAINER, wall=cfg.wall_material,
                              wall_thickness_m=cfg.wall_thickness_m, content=content,
                              noise_std=cfg.noise_std, seed=_child_seed(s))
            frame = synthesize_contact_echo(scene, stack, timing, registry,
                                            t0=i * cfg.sample_interval_s)
            rows.append(spectral_features(frame, n_bands=cfg.n_bands).to_vector())
            labels.append(cls)
    content_data = Dataset(np.array(rows), np.array(labels), contents,
                           split_seed=cfg.seed,
                           feature_names=SpectralFeatures.vector_names(cfg.n_bands))
    content_model = train_gbdt(content_data, n_rounds=cfg.gbdt_rounds,
                               max_depth=cfg.gbdt_depth,
                               learning_rate=cfg.gbdt_learning_rate, seed=cfg.seed)

    pattern_data = build_pattern_dataset(patterns, cfg.samples_per_class,
                                         seed=_child_seed(pattern_seed_seq),
                                         noise_std=cfg.image_noise)
    pattern_model = train_gbdt(pattern_data, n_rounds=cfg.gbdt_rounds,
                               max_depth=cfg.gbdt_depth,
                               learning_rate=cfg.gbdt_learning_rate, seed=cfg.seed)
    models = TimelineModels(content_model, pattern_model, n_bands=cfg.n_bands)

    containers = [(content, pattern) for content in contents for pattern in patterns]
    run_seeds = timeline_seq.spawn(len(containers))

    verdicts, timelines = [], []
    n_correct = 0
    for idx, ((content, pattern), run_seed) in enumerate(zip(containers, run_seeds)):
        scenario = build_container_scenario(pattern, content)
        result = run_timeline(scenario, models, seed=_child_seed(run_seed),
                              noise_std=cfg.noise_std,
                              image_noise=cfg.timeline_image_noise,
                              wall_material=cfg.wall_material,
                              wall_thickness_m=cfg.wall_thickness_m,
                              registry=registry)
        pred_pattern, pred_content = result.verdict if result.verdict else ("", "")
        correct = result.verdict == (pattern, content)
        n_correct += int(correct)
        verdicts.append((f"container_{idx}", pattern, content,
                         pred_pattern, pred_content, correct, result.status))
        timelines.append(result)

    result = InspectionResult(verdicts, n_correct, timelines)
    if write and cfg.output_dir:
        _write_inspection(cfg, result)
    return result


def _write_inspection(cfg: ExperimentConfig, res: InspectionResult) -> None:
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    _write_csv(os.path.join(out, "inspection_verdicts.csv"),
               "container,true_pattern,true_content,predicted_pattern,"
               "predicted_content,correct,status",
               (f"{c},{tp},{tc},{pp},{pc},{int(ok)},{status}"
                for c, tp, tc, pp, pc, ok, status in res.verdicts))
    for (name, *_), timeline in zip(res.verdicts, res.timelines):
        timeline.write_log(os.path.join(out, f"inspection_log_{name}.csv"))
    with open(os.path.join(out, "config.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.describe())


def run_experiment(cfg: ExperimentConfig, write: bool = True):
    runner = {"proximity": run_proximity, "material": run_material,
              "dualmodal": run_dualmodal, "inspection": run_inspection}
    return runner[cfg.experiment](cfg, write=write)
