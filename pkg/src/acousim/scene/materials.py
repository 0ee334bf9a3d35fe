"""Frequency-banded energy absorption coefficients for room surfaces."""

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ValidationError

#: Octave band centres (Hz) used throughout the simulator. The two top bands
#: extend the audible octave set into the ultrasonic range; the 32 kHz band
#: spans 22.6-45.2 kHz.
OCTAVE_BANDS = (125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0, 32000.0)


def band_edges(centers=OCTAVE_BANDS):
    """Lower and upper edge of each octave band (centre / sqrt 2, centre * sqrt 2)."""
    c = np.asarray(centers, dtype=float)
    return c / np.sqrt(2.0), c * np.sqrt(2.0)


@dataclass(frozen=True)
class Material:
    name: str
    band_absorption: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.band_absorption:
            raise ValidationError("material needs at least one band", self.name)
        centers = list(self.band_absorption.keys())
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValidationError("band centres must be strictly increasing", self.name)
        for f, a in self.band_absorption.items():
            if not (0.0 <= a <= 1.0):
                raise ValidationError(f"absorption {a} at {f} Hz outside [0, 1]", self.name)

    @classmethod
    def uniform(cls, name, alpha, bands=OCTAVE_BANDS):
        return cls(name, {float(b): float(alpha) for b in bands})

    @property
    def bands(self):
        return tuple(self.band_absorption)

    def coefficients(self, bands=OCTAVE_BANDS):
        """Absorption at each requested band centre.

        Every requested band must be defined; materials are never extrapolated
        outside the spectrum they were characterised for.
        """
        missing = [b for b in bands if float(b) not in self.band_absorption]
        if missing:
            raise ValidationError(
                f"material does not cover bands {missing}", self.name
            )
        return np.array([self.band_absorption[float(b)] for b in bands])

    def is_uniform(self):
        vals = list(self.band_absorption.values())
        return all(v == vals[0] for v in vals)


def _lib(name, audible, ultrasonic):
    return Material(name, dict(zip(OCTAVE_BANDS, list(audible) + list(ultrasonic))))


# Audible values are typical tabulated octave-band figures; ultrasonic bands
# for plywood carry the mean of a 20-50 kHz reflection measurement.
MATERIALS = {
    "plywood": _lib("plywood", [0.42, 0.21, 0.10, 0.08, 0.06, 0.06, 0.06], [0.43, 0.43]),
    "wood": _lib("wood", [0.15, 0.11, 0.10, 0.07, 0.06, 0.07, 0.07], [0.45, 0.45]),
    "concrete": _lib("concrete", [0.01, 0.01, 0.02, 0.02, 0.02, 0.05, 0.05], [0.06, 0.08]),
    "glass": _lib("glass", [0.35, 0.25, 0.18, 0.12, 0.07, 0.05, 0.05], [0.05, 0.05]),
    "hard_surface": Material.uniform("hard_surface", 0.02),
    "anechoic": Material.uniform("anechoic", 1.0),
}


def get_material(spec):
    """Resolve a library name, a scalar absorption, or a band mapping."""
    if isinstance(spec, Material):
        return spec
    if isinstance(spec, str):
        try:
            return MATERIALS[spec]
        except KeyError:
            raise ValidationError(f"unknown material {spec!r}") from None
    if isinstance(spec, (int, float)):
        return Material.uniform(f"uniform_{float(spec):g}", float(spec))
    if isinstance(spec, dict):
        name = spec.get("name", "custom")
        if "absorption" in spec and not isinstance(spec["absorption"], (list, tuple)):
            return Material.uniform(name, float(spec["absorption"]))
        bands = spec.get("bands", OCTAVE_BANDS)
        coeffs = spec["absorption"]
        if len(bands) != len(coeffs):
            raise ValidationError("bands and absorption lengths differ", name)
        return Material(name, {float(b): float(a) for b, a in zip(bands, coeffs)})
    raise ValidationError(f"cannot interpret material {spec!r}")
