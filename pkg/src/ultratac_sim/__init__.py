"""Simulator and signal pipeline for an ultrasound-augmented visuotactile sensor."""

from .acoustics import (LayerSpec, LayerStack, MaterialAcoustics, MaterialRegistry,
                        builtin_materials, default_sensor_stack, load_materials,
                        matching_impedance, quarter_wave_thickness,
                        reflection_coefficient, stack_transmission)
from .controller import (ModeController, ScenarioStep, SyncedPair, TactileFrame,
                         TimelineModels, build_container_scenario, detect_touch,
                         run_timeline, step_mode, sync_streams)
from .dataset import ConfusionMatrix, Dataset
from .echo import (EchoFrame, SceneKind, SceneSpec, envelope, synthesize_air_echo,
                   synthesize_contact_echo)
from .gbdt import GBDTModel, evaluate, load_model, predict, save_model, train_gbdt
from .modes import SensorMode, TimingConfig
from .pca import PCAProjection, pca_fit, pca_inverse, pca_transform
from .pipeline import (DistanceEstimate, KalmanDenoiser, KalmanParams,
                       SpectralFeatures, capture_reference, estimate_distance,
                       kalman_filter, spectral_features)
from .texture import (MomentFeatures, PATTERN_NAMES, augment_pattern,
                      build_pattern_dataset, render_pattern, texture_features)

__version__ = "0.1.0"
