"""Operating modes and acquisition timing of the ultrasound module."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

__all__ = [
    "SensorMode",
    "TimingConfig",
    "CYCLE_PERIOD_S",
    "ADC_RATE_HZ",
    "PROXIMITY_PULSE_COUNT",
    "MATERIAL_PULSE_COUNT",
    "PROXIMITY_GAIN_DB",
    "ACQUISITION_WINDOW_S",
]

CYCLE_PERIOD_S = 0.02          # one transmit/acquire cycle
ADC_RATE_HZ = 2.4e6            # envelope sampling rate
PROXIMITY_PULSE_COUNT = 5
MATERIAL_PULSE_COUNT = 20
PROXIMITY_GAIN_DB = 55.5
ACQUISITION_WINDOW_S = 1.0e-3  # listening window inside each cycle


class SensorMode(Enum):
    PROXIMITY = "proximity"
    MATERIAL_DETECTION = "material_detection"


@dataclass(frozen=True)
class TimingConfig:
    """Pulse/gain/clocking parameters for one operating mode.

    The pulse count is tied to the mode: ranging uses few pulses to keep
    the blind zone short, material detection uses a longer burst.
    """

    mode: SensorMode
    pulse_count: int
    gain_db: float
    cycle_period_s: float = CYCLE_PERIOD_S
    adc_rate_hz: float = ADC_RATE_HZ
    acquisition_window_s: float = ACQUISITION_WINDOW_S

    def __post_init__(self) -> None:
        if self.pulse_count < 1:
            raise ValueError("pulse_count must be >= 1")
        if self.mode is SensorMode.PROXIMITY:
            if self.pulse_count != PROXIMITY_PULSE_COUNT:
                raise ValueError("proximity mode uses exactly 5 pulses per cycle")
            if self.gain_db != PROXIMITY_GAIN_DB:
                raise ValueError("proximity mode uses a 55.5 dB reception gain")
        elif self.pulse_count != MATERIAL_PULSE_COUNT:
            raise ValueError("material detection mode uses exactly 20 pulses per cycle")

    @classmethod
    def proximity(cls) -> "TimingConfig":
        return cls(SensorMode.PROXIMITY, PROXIMITY_PULSE_COUNT, PROXIMITY_GAIN_DB)

    @classmethod
    def material_detection(cls, gain_db: float = PROXIMITY_GAIN_DB) -> "TimingConfig":
        return cls(SensorMode.MATERIAL_DETECTION, MATERIAL_PULSE_COUNT, gain_db)

    @classmethod
    def for_mode(cls, mode: SensorMode) -> "TimingConfig":
        if mode is SensorMode.PROXIMITY:
            return cls.proximity()
        return cls.material_detection()
