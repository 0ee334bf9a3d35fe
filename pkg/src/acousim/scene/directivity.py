"""Frequency-independent cardioid-family directivities and transducers."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .._validation import check_fraction, check_point, check_unit_vector, normalize
from ..exceptions import ValidationError

PATTERNS = {
    "omni": 1.0,
    "omnidirectional": 1.0,
    "subcardioid": 0.75,
    "cardioid": 0.5,
    "hypercardioid": 0.25,
    "figure_eight": 0.0,
}


@dataclass(frozen=True, eq=False)
class Directivity:
    """Gain ``p + (1 - p) cos(theta)`` around ``orientation``.

    ``p = 1`` is omnidirectional, ``0.5`` cardioid, ``0.25`` hypercardioid and
    ``0`` figure-eight. The gain scales path amplitude.
    """

    p: float = 1.0
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def __post_init__(self):
        check_fraction(self.p, "directivity.p")
        object.__setattr__(self, "orientation", check_unit_vector(self.orientation))

    @classmethod
    def from_pattern(cls, pattern, orientation=(1.0, 0.0, 0.0)):
        if isinstance(pattern, str):
            try:
                p = PATTERNS[pattern]
            except KeyError:
                raise ValidationError(f"unknown pattern {pattern!r}", "directivity") from None
        else:
            p = float(pattern)
        return cls(p, normalize(orientation))

    @classmethod
    def aimed(cls, pattern, position, target):
        """Directivity at ``position`` pointing at ``target``."""
        return cls.from_pattern(pattern, np.asarray(target, float) - np.asarray(position, float))

    @property
    def is_omni(self):
        return self.p == 1.0

    def gain(self, directions):
        return directivity_gain(self, directions)


def directivity_gain(d, direction_to_target):
    """Amplitude gain of ``d`` towards unit vector(s) ``direction_to_target``.

    Lies in ``[2p - 1, 1]``; negative values encode the rear lobe polarity
    inversion of sub-omni patterns.
    """
    u = np.asarray(direction_to_target, dtype=float)
    cos = np.clip(u @ d.orientation, -1.0, 1.0)
    return d.p + (1.0 - d.p) * cos


@dataclass(frozen=True, eq=False)
class Transducer:
    kind: str  # "speaker" or "microphone"
    position: np.ndarray
    directivity: Directivity = field(default_factory=Directivity)
    sample_rate_hz: Optional[int] = None
    emitted_signal: Optional[str] = None
    id: str = ""

    def __post_init__(self):
        if self.kind not in ("speaker", "microphone"):
            raise ValidationError(f"unknown transducer kind {self.kind!r}", "transducer.kind")
        object.__setattr__(self, "position", check_point(self.position, 3, "transducer.position"))
        if self.kind == "microphone" and self.sample_rate_hz is not None and self.sample_rate_hz <= 0:
            raise ValidationError("sample rate must be positive", "transducer.sample_rate_hz")


def check_transducer(t, room, sim_rate=None):
    from .room import point_in_room

    if not point_in_room(t.position, room):
        raise ValidationError(f"{t.kind} {t.id or ''} at {t.position.tolist()} is not inside the room")
    if sim_rate is not None and t.sample_rate_hz is not None and t.sample_rate_hz > sim_rate:
        raise ValidationError(
            f"microphone rate {t.sample_rate_hz} exceeds simulation rate {sim_rate}"
        )
    return t
