from dataclasses import dataclass

import numpy as np

from ..exceptions import AliasedChirp, ValidationError


@dataclass(frozen=True)
class ChirpSpec:
    f_start: float = 45_000.0
    f_end: float = 25_000.0
    duration: float = 0.03
    amplitude: float = 1.0

    def __post_init__(self):
        if self.f_start <= 0 or self.f_end <= 0:
            raise ValidationError("chirp frequencies must be positive", "signal")
        if self.duration <= 0:
            raise ValidationError("chirp duration must be positive", "signal.duration")

    @property
    def descending(self):
        return self.f_start > self.f_end

    def instantaneous_frequency(self, t):
        return self.f_start + (self.f_end - self.f_start) * np.asarray(t) / self.duration


def generate_chirp(spec, sample_rate):
    """Linear chirp ``A sin(2 pi (f0 t + (f1 - f0) t^2 / (2 T)))`` for ``t`` in ``[0, T)``."""
    if max(spec.f_start, spec.f_end) >= sample_rate / 2.0:
        raise AliasedChirp(
            f"chirp reaches {max(spec.f_start, spec.f_end)} Hz, Nyquist is {sample_rate / 2} Hz"
        )
    n = int(round(spec.duration * sample_rate))
    t = np.arange(n) / sample_rate
    k = (spec.f_end - spec.f_start) / (2.0 * spec.duration)
    return spec.amplitude * np.sin(2.0 * np.pi * (spec.f_start * t + k * t * t))
