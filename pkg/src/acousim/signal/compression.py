"""Pulse compression and envelope features."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal as sps

from ..exceptions import EmptyTemplate, UpsamplingRequested, ValidationError


@dataclass(frozen=True, eq=False)
class CompressedEnvelope:
    samples: np.ndarray
    sample_rate_hz: float
    fixed_length: Optional[int] = None

    def __post_init__(self):
        if np.any(self.samples < 0):
            raise ValidationError("envelope samples must be non-negative")
        if self.fixed_length is not None and len(self.samples) != self.fixed_length:
            raise ValidationError("envelope length differs from fixed_length")

    def __len__(self):
        return len(self.samples)


def agc(x):
    """Scale to unit peak magnitude (zero input passes through)."""
    x = np.asarray(x, dtype=float)
    peak = np.max(np.abs(x)) if x.size else 0.0
    return x / peak if peak > 0 else x.copy()


def matched_filter(received, template, one_bit=False):
    """Cross-correlate ``received`` with ``template``, normalised by template energy.

    Output index ``k`` is the correlation with the template starting at sample
    ``k``; the output has the length of ``received``. With ``one_bit`` both
    inputs are sign-quantised first.
    """
    r = np.asarray(received, dtype=float)
    t = np.asarray(template, dtype=float)
    if t.size == 0:
        raise EmptyTemplate("template is empty")
    if t.size > r.size:
        raise ValidationError("template longer than received signal", "template")
    if one_bit:
        r, t = np.sign(r), np.sign(t)
    energy = float(np.dot(t, t))
    if energy == 0:
        raise EmptyTemplate("template has zero energy")
    full = sps.correlate(r, t, mode="full", method="fft" if r.size * t.size > 1e5 else "direct")
    out = full[t.size - 1 : t.size - 1 + r.size] / energy
    if not np.any(r):
        out = np.zeros_like(out)
    return out


def envelope(correlation, cutoff_hz=5_000.0, sample_rate=250_000.0, order=4):
    """Rectify then zero-phase low-pass filter, so peaks are not shifted."""
    x = np.abs(np.asarray(correlation, dtype=float))
    if not (0 < cutoff_hz < sample_rate / 2.0):
        raise ValidationError("cutoff must lie in (0, sample_rate / 2)", "postprocess.envelope_cutoff_hz")
    if not np.any(x):
        return CompressedEnvelope(np.zeros_like(x), float(sample_rate))
    sos = sps.butter(order, cutoff_hz, fs=sample_rate, output="sos")
    y = sps.sosfiltfilt(sos, x) if len(x) > 3 * (2 * len(sos) + 1) else x
    return CompressedEnvelope(np.maximum(y, 0.0), float(sample_rate))


def fixed_size_downsample(env, target_length):
    """Anti-aliased decimation of an envelope to exactly ``target_length`` samples.

    Output sample ``j`` sits at input position ``j * n / target_length``.
    """
    if isinstance(env, CompressedEnvelope):
        x, rate = env.samples, env.sample_rate_hz
    else:
        x, rate = np.asarray(env, dtype=float), 1.0
    n = len(x)
    if target_length < 2:
        raise ValidationError("target_length must be at least 2", "postprocess.fixed_length")
    if target_length > n:
        raise UpsamplingRequested(f"cannot downsample {n} samples to {target_length}")
    scale = target_length / n
    if target_length == n:
        y = x.copy()
    else:
        wn = 0.8 * scale
        y = x
        if np.any(x) and len(x) > 27:
            sos = sps.butter(4, wn, output="sos")
            y = sps.sosfiltfilt(sos, x)
        y = np.interp(np.arange(target_length) / scale, np.arange(n), y)
    return CompressedEnvelope(np.maximum(y, 0.0), rate * scale, int(target_length))
