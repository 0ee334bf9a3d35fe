"""Time-of-flight picking on pulse-compression envelopes."""

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks, peak_prominences

from ..exceptions import NoPeakFound, ValidationError
from ..propagation.physics import speed_of_sound


@dataclass(frozen=True)
class RangeEstimate:
    anchor_id: str
    range_m: float
    tof_s: float
    peak_quality: float = 0.0


def _parabolic(y, k):
    if 0 < k < len(y) - 1:
        a, b, c = y[k - 1], y[k], y[k + 1]
        den = a - 2 * b + c
        if den < 0:
            return k + 0.5 * (a - c) / den
    return float(k)


def estimate_tof(envelope, mode="max", min_prominence=0.3, sample_rate=None, sound_speed=None,
                 anchor_id="", interpolate=False, offset_s=0.0):
    """Pick the arrival in an envelope and convert it to a range.

    ``mode="max"`` takes the global maximum. ``mode="prominence"`` takes the
    earliest peak whose prominence is at least ``min_prominence`` times the
    envelope maximum, favouring the first arrival over stronger multipath.
    Index ``k`` means the template started at sample ``k``, so
    ``tof = k / rate - offset_s``.
    """
    if hasattr(envelope, "samples"):
        x = np.asarray(envelope.samples, dtype=float)
        rate = envelope.sample_rate_hz if sample_rate is None else sample_rate
    else:
        x = np.asarray(envelope, dtype=float)
        rate = sample_rate
    if rate is None or rate <= 0:
        raise ValidationError("sample rate required", "sample_rate")
    if x.size == 0:
        raise ValidationError("empty envelope", "envelope")
    peak = float(np.max(x))
    if not np.isfinite(peak) or peak <= 0:
        raise NoPeakFound("envelope has no positive peak")

    if mode == "max":
        k = int(np.argmax(x))
        padded = np.concatenate([[0.0], x, [0.0]])
        quality = float(peak_prominences(padded, [k + 1])[0][0])
    elif mode == "prominence":
        padded = np.concatenate([[0.0], x, [0.0]])
        peaks, props = find_peaks(padded, prominence=min_prominence * peak)
        if len(peaks) == 0:
            raise NoPeakFound("no peak reaches the prominence threshold")
        k = int(peaks[0] - 1)
        quality = float(props["prominences"][0])
    else:
        raise ValidationError(f"unknown mode {mode!r}", "positioning.tof_mode")

    pos = _parabolic(x, k) if interpolate else float(k)
    tof = max(pos / rate - offset_s, 0.0)
    v = speed_of_sound(20.0) if sound_speed is None else sound_speed
    return RangeEstimate(str(anchor_id), tof * v, tof, quality)
