"""Band-wise room impulse response synthesis from image sources."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import MicAtImagePosition, ValidationError
from ..scene.directivity import Directivity, directivity_gain
from ..scene.materials import OCTAVE_BANDS
from .filterbank import OctaveFilterBank
from .physics import air_absorption_coefficient

FRACTIONAL_DELAY_TAPS = 81
CHUNK = 100_000


@dataclass(frozen=True, eq=False)
class Rir:
    samples: np.ndarray
    sample_rate_hz: float
    source_id: str = ""
    mic_id: str = ""

    def __len__(self):
        return len(self.samples)

    @property
    def energy(self):
        return float(np.sum(self.samples**2))


def fractional_delay_kernel(delays, n_taps=FRACTIONAL_DELAY_TAPS):
    """Hann-windowed sinc taps for each (fractional) delay in samples.

    Returns ``(first_index, taps)``: tap ``k`` of row ``i`` lands at sample
    ``first_index[i] + k``. Integer delays give a unit impulse.
    """
    delays = np.asarray(delays, dtype=float)
    half = n_taps // 2
    center = np.round(delays).astype(np.int64)
    n = center[:, None] + np.arange(-half, half + 1)[None, :]
    x = n - delays[:, None]
    win = 0.5 * (1.0 + np.cos(np.pi * x / (half + 1)))
    return center - half, np.sinc(x) * win


def bands_for_rate(fs, centers=OCTAVE_BANDS):
    """Octave bands whose upper edge fits below Nyquist at rate ``fs``."""
    used = tuple(c for c in centers if c * np.sqrt(2.0) <= fs / 2.0)
    if not used:
        raise ValidationError(f"sample rate {fs} too low for any octave band", "sim_rate")
    return used


def air_coefficients(bands, environment, enabled=True):
    if not enabled:
        return np.zeros(len(bands))
    return np.asarray(
        air_absorption_coefficient(np.asarray(bands), environment.temperature_c, environment.relative_humidity)
    )


def _distances(images, mic_position):
    vec = np.asarray(mic_position, dtype=float)[None, :] - images.positions
    d = np.linalg.norm(vec, axis=1)
    if np.any(d <= 1e-12):
        raise MicAtImagePosition("microphone coincides with an image source")
    return vec, d


def path_amplitudes(images, mic_position, speaker_dir=None, mic_dir=None, air=None, bands=None):
    """Per-image band amplitudes and path lengths.

    Amplitude = 1/(4 pi d) * reflection gain * air factor * speaker gain * mic gain.
    """
    vec, d = _distances(images, mic_position)
    u = vec / d[:, None]  # arrival direction at the mic
    g = np.ones(len(d))
    if speaker_dir is not None and not speaker_dir.is_omni:
        dep = images.departure
        launch = dep * u if dep.ndim == 2 else np.einsum("nij,nj->ni", dep, u)
        g = g * directivity_gain(speaker_dir, launch)
    if mic_dir is not None and not mic_dir.is_omni:
        g = g * directivity_gain(mic_dir, -u)
    gains = images.gains
    if bands is not None and tuple(bands) != tuple(images.bands):
        gains = gains[:, [list(images.bands).index(b) for b in bands]]
    amp = gains * g[:, None]
    amp = amp / (4.0 * np.pi * d)[:, None]
    if air is not None:
        amp = amp * np.exp(-np.outer(d, air))
    return amp, d


def synthesize_rir(images, mic, speaker=None, environment=None, sim_rate=250_000, ray_tail=None,
                   air_absorption=True, bands=None, min_length=0, filterbank=None,
                   source_id="", mic_id="", tail_seed=0):
    """Sum delayed, attenuated image arrivals per band and recombine the bands.

    ``mic`` and ``speaker`` are :class:`~acousim.scene.Transducer` objects (or
    plain positions for omnidirectional devices).
    """
    from ..scene.room import Environment

    env = environment or Environment()
    bands = tuple(bands) if bands is not None else bands_for_rate(sim_rate)
    if sim_rate < 2.0 * bands[-1] * np.sqrt(2.0):
        raise ValidationError("simulation rate below twice the highest band edge in use", "sim_rate")
    mic_pos, mic_dir = _unpack(mic)
    _, spk_dir = _unpack(speaker) if speaker is not None else (None, None)
    c = env.sound_speed

    air = air_coefficients(bands, env, air_absorption)
    fb = filterbank or OctaveFilterBank(sim_rate, bands)
    if len(images) == 0:
        return Rir(np.zeros(max(min_length, 1)), float(sim_rate), source_id, mic_id)
    _, d_all = _distances(images, mic_pos)
    first_all = np.round(d_all / c * sim_rate).astype(np.int64) - FRACTIONAL_DELAY_TAPS // 2
    length = int(max(np.max(first_all) + FRACTIONAL_DELAY_TAPS, min_length, 1))

    trains = None
    flat = None
    for start in range(0, len(images), CHUNK):
        chunk = images.select(slice(start, start + CHUNK)) if len(images) > CHUNK else images
        amp, d = path_amplitudes(chunk, mic_pos, spk_dir, mic_dir, air, bands)
        first, taps = fractional_delay_kernel(d / c * sim_rate)
        idx = (first[:, None] + np.arange(FRACTIONAL_DELAY_TAPS)[None, :]).ravel()
        valid = idx >= 0  # taps before t = 0 are dropped
        idx = idx[valid]
        if np.all(amp == amp[:, :1]):
            # identical amplitude in every band: the bank sums to identity
            part = np.bincount(idx, (taps * amp[:, :1]).ravel()[valid], minlength=length)[:length]
            flat = part if flat is None else flat + part
        else:
            if trains is None:
                trains = np.zeros((len(bands), length))
            for b in range(len(bands)):
                w = (taps * amp[:, b : b + 1]).ravel()[valid]
                trains[b] += np.bincount(idx, w, minlength=length)[:length]
    rir = np.zeros(length) if flat is None else fb.highpass(flat, length)
    if trains is not None:
        rir = rir + fb.combine(trains, length)

    if ray_tail is not None:
        tail = ray_tail.to_signal(fb, tail_seed, length=None)
        n = max(len(rir), len(tail))
        out = np.zeros(n)
        out[: len(rir)] += rir
        out[: len(tail)] += tail
        rir = out
    return Rir(rir, float(sim_rate), source_id, mic_id)


def _unpack(t):
    if t is None:
        return None, None
    if hasattr(t, "position"):
        return np.asarray(t.position, dtype=float), t.directivity
    return np.asarray(t, dtype=float), Directivity()
