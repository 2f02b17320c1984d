"""Layered-media acoustics for the sensor stack.

Material registry, matching-layer design formulas, interface reflection
coefficients and lossless 1-D transfer-matrix propagation. Impedances are
in MRayls, sound speeds in m/s, thicknesses in meters. All functions here
are pure and safe to call from any thread.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MaterialAcoustics",
    "MaterialRegistry",
    "LayerSpec",
    "LayerStack",
    "StackResponse",
    "builtin_materials",
    "load_materials",
    "matching_impedance",
    "quarter_wave_thickness",
    "reflection_coefficient",
    "stack_transmission",
    "default_sensor_stack",
]


@dataclass(frozen=True)
class MaterialAcoustics:
    """A named medium: acoustic impedance (MRayls) and sound speed (m/s)."""

    name: str
    impedance: float
    sound_speed: float

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("material name must be non-empty")
        if not (math.isfinite(self.impedance) and self.impedance > 0):
            raise ValueError(f"impedance must be positive and finite, got {self.impedance}")
        if not (math.isfinite(self.sound_speed) and self.sound_speed > 0):
            raise ValueError(f"sound_speed must be positive and finite, got {self.sound_speed}")


# Canonical constants used by the synthetic experiments. Impedances for the
# seven stack materials follow the usual handbook values; the remaining
# entries (targets, slabs, container contents) are project constants chosen
# once and documented in the README. Sound speeds are likewise fixed project
# constants; acrylic is pinned at 2800 m/s so the 1 MHz quarter-wave layer
# comes out at 0.7 mm.
_BUILTIN_TABLE = (
    # name, impedance MRayls, sound speed m/s
    ("tungsten", 100.0, 1800.0),
    ("epoxy", 3.5, 2500.0),
    ("pzt", 30.0, 4000.0),
    ("acrylic", 3.2, 2800.0),
    ("pdms", 1.1, 1000.0),
    ("hgm_pdms", 0.2, 600.0),
    ("air", 0.000415, 343.0),
    ("water", 1.48, 1480.0),
    ("oil", 1.30, 1450.0),
    ("iron", 46.0, 5900.0),
    ("nylon", 2.9, 2600.0),
    ("wood", 1.6, 3300.0),
    ("rubber", 1.5, 1600.0),
)

# Aliases resolve to an existing entry; "resin" and "plastic" map onto the
# acrylic constants unless a config overrides them.
_ALIASES = {
    "resin": "acrylic",
    "plastic": "acrylic",
    "hgm": "hgm_pdms",
    "hollow glass microsphere": "hgm_pdms",
    "hollow_glass_microsphere": "hgm_pdms",
}


class MaterialRegistry:
    """Case-insensitive registry of MaterialAcoustics with unique names."""

    def __init__(self, materials: "list[MaterialAcoustics] | None" = None,
                 aliases: "dict[str, str] | None" = None):
        self._by_name: dict[str, MaterialAcoustics] = {}
        self._aliases = dict(aliases or {})
        for mat in materials or []:
            self.add(mat)

    def add(self, material: MaterialAcoustics, replace: bool = False) -> None:
        key = material.name.lower()
        if key in self._by_name and not replace:
            raise ValueError(f"duplicate material name: {material.name}")
        self._by_name[key] = material

    def lookup(self, name: str) -> MaterialAcoustics:
        key = name.strip().lower()
        key = self._aliases.get(key, key)
        try:
            return self._by_name[key]
        except KeyError:
            raise KeyError(f"unknown material: {name!r}") from None

    def __contains__(self, name: str) -> bool:
        key = name.strip().lower()
        return self._aliases.get(key, key) in self._by_name

    def names(self) -> list[str]:
        return list(self._by_name)

    def __len__(self) -> int:
        return len(self._by_name)


def builtin_materials() -> MaterialRegistry:
    """Registry of the built-in media constants."""
    mats = [MaterialAcoustics(name, z, c) for name, z, c in _BUILTIN_TABLE]
    return MaterialRegistry(mats, aliases=_ALIASES)


def load_materials(path) -> MaterialRegistry:
    """Load a registry from a plain-text key-value config.

    Each non-comment line reads ``name = impedance_mrayl, sound_speed_mps``.
    Entries extend or override the built-ins; the built-ins alone are used
    for anything the file does not mention.
    """
    registry = builtin_materials()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'name = impedance, sound_speed'")
            name, rhs = line.split("=", 1)
            parts = [p.strip() for p in rhs.split(",")]
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two values after '='")
            mat = MaterialAcoustics(name.strip(), float(parts[0]), float(parts[1]))
            registry.add(mat, replace=True)
    return registry


def matching_impedance(z1: float, z2: float) -> float:
    """Optimal impedance of a single matching layer between two media.

    Parameters
    ----------
    z1, z2 : float
        Impedances of the media on either side, MRayls.

    Returns
    -------
    float
        The geometric mean sqrt(z1 * z2), MRayls.
    """
    if z1 <= 0 or z2 <= 0 or not (math.isfinite(z1) and math.isfinite(z2)):
        raise ValueError("impedances must be positive and finite")
    return math.sqrt(z1 * z2)


def quarter_wave_thickness(sound_speed: float, frequency: float) -> float:
    """Quarter-wavelength layer thickness c / (4 f), in meters."""
    if sound_speed <= 0 or frequency <= 0:
        raise ValueError("sound_speed and frequency must be positive")
    if not (math.isfinite(sound_speed) and math.isfinite(frequency)):
        raise ValueError("sound_speed and frequency must be finite")
    return sound_speed / (4.0 * frequency)


def reflection_coefficient(z_from: float, z_to: float) -> float:
    """Pressure reflection coefficient for normal incidence.

    Positive when reflecting off a stiffer medium. Value is in [-1, 1].
    """
    if z_from <= 0 or z_to <= 0 or not (math.isfinite(z_from) and math.isfinite(z_to)):
        raise ValueError("impedances must be positive and finite")
    return (z_to - z_from) / (z_to + z_from)


@dataclass(frozen=True)
class LayerSpec:
    """One interior layer: a material and its thickness in meters."""

    material: MaterialAcoustics
    thickness: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.thickness) and self.thickness > 0):
            raise ValueError(f"layer thickness must be positive and finite, got {self.thickness}")


@dataclass(frozen=True)
class LayerStack:
    """Ordered layers from the transducer face outward, between two half-spaces."""

    layers: tuple[LayerSpec, ...]
    front_medium: MaterialAcoustics
    back_medium: MaterialAcoustics

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))

    def reversed(self) -> "LayerStack":
        """The same stack traversed from the far side."""
        return LayerStack(tuple(reversed(self.layers)), self.back_medium, self.front_medium)

    def outer_material(self) -> MaterialAcoustics:
        """Material of the outermost interior layer (front medium if none)."""
        return self.layers[-1].material if self.layers else self.front_medium


@dataclass(frozen=True)
class StackResponse:
    power_transmission: float
    power_reflection: float


def stack_transmission(stack: LayerStack, frequency: float) -> StackResponse:
    """Power transmission/reflection of a lossless layered stack.

    Composes the per-layer pressure/velocity transfer matrices at the given
    frequency and converts the resulting amplitude coefficients to power
    fractions. Because the media are lossless the two fractions sum to one.

    Parameters
    ----------
    stack : LayerStack
        Interior layers plus the two bounding half-spaces.
    frequency : float
        Drive frequency in Hz, > 0.
    """
    if not (math.isfinite(frequency) and frequency > 0):
        raise ValueError("frequency must be positive and finite")

    m = np.eye(2, dtype=complex)
    for layer in stack.layers:
        if layer.thickness <= 0:
            continue  # degenerate layer carries no phase
        z = layer.material.impedance
        phase = 2.0 * math.pi * frequency * layer.thickness / layer.material.sound_speed
        cos_p = math.cos(phase)
        sin_p = math.sin(phase)
        m = m @ np.array([[cos_p, 1j * z * sin_p], [1j * sin_p / z, cos_p]])

    z_front = stack.front_medium.impedance
    z_back = stack.back_medium.impedance
    a, b = m[0, 0], m[0, 1]
    c, d = m[1, 0], m[1, 1]

    denom = a + b / z_back + z_front * c + z_front * d / z_back
    t = 2.0 / denom
    r = t * (a + b / z_back) - 1.0

    power_t = float(abs(t) ** 2 * z_front / z_back)
    power_r = float(abs(r) ** 2)
    return StackResponse(power_t, power_r)


def default_sensor_stack(frequency: float = 1.0e6,
                         registry: "MaterialRegistry | None" = None,
                         back: str = "air") -> LayerStack:
    """The sensor's acoustic stack: transducer ceramic, quarter-wave acrylic,
    elastomer, and the microsphere-loaded membrane, radiating into `back`.

    The acrylic and membrane thicknesses are quarter-wave at `frequency`;
    the elastomer layer is a fixed 3 mm.
    """
    reg = registry or builtin_materials()
    pzt = reg.lookup("pzt")
    acrylic = reg.lookup("acrylic")
    pdms = reg.lookup("pdms")
    membrane = reg.lookup("hgm_pdms")
    layers = (
        LayerSpec(acrylic, quarter_wave_thickness(acrylic.sound_speed, frequency)),
        LayerSpec(pdms, 3.0e-3),
        LayerSpec(membrane, quarter_wave_thickness(membrane.sound_speed, frequency)),
    )
    return LayerStack(layers, pzt, reg.lookup(back))
