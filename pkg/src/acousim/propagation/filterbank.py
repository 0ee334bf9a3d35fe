"""Octave filter bank whose band responses sum to exactly one.

Bands are defined in the frequency domain as differences of smooth, monotone
low-pass masks (raised-cosine crossovers half an octave wide in log
frequency). The masks are real, so every band filter is zero-phase and the
decomposition neither delays nor reshapes a pulse when bands are recombined.

The lowest band also rolls off below its lower edge, so the bank sums to one
from about 100 Hz up to Nyquist and blocks DC. Dense same-sign image arrivals
otherwise build a spurious DC offset that grows along the response.
"""

import numpy as np
from scipy import fft as sp_fft

from ..scene.materials import OCTAVE_BANDS


class OctaveFilterBank:
    def __init__(self, fs, centers=OCTAVE_BANDS, crossover_octaves=0.5, block_dc=True):
        self.fs = float(fs)
        self.block_dc = block_dc
        self.centers = np.asarray(centers, dtype=float)
        self.crossovers = self.centers[:-1] * np.sqrt(2.0)
        self.width = float(crossover_octaves)
        self._cache = {}

    @property
    def n_bands(self):
        return len(self.centers)

    def _lowpass(self, freqs, fc):
        x = (np.log2(np.maximum(freqs, 1e-12)) - np.log2(fc)) / self.width  # in [-0.5, 0.5] on the ramp
        ramp = 0.5 * (1.0 - np.sin(np.pi * np.clip(x, -0.5, 0.5)))
        return ramp

    def weights(self, n_fft):
        """(n_bands, n_fft // 2 + 1) real frequency masks summing to one above the DC roll-off."""
        if n_fft not in self._cache:
            freqs = np.fft.rfftfreq(n_fft, 1.0 / self.fs)
            lows = [self._lowpass(freqs, fc) for fc in self.crossovers]
            floor = self._lowpass(freqs, self.centers[0] / np.sqrt(2.0)) if self.block_dc else 0.0 * freqs
            lows = [floor] + lows + [np.ones_like(freqs)]
            W = np.vstack([lows[i + 1] - lows[i] for i in range(self.n_bands)])
            self._cache[n_fft] = W
        return self._cache[n_fft]

    def n_fft_for(self, length):
        # headroom for the non-causal part of the narrow low bands
        pad = int(np.ceil(8.0 * self.fs / (self.centers[0] / np.sqrt(2.0))))
        return sp_fft.next_fast_len(length + pad, real=True)

    def combine(self, band_signals, length=None):
        """Filter each row through its band and sum: ``sum_b h_b * x_b``."""
        X = np.atleast_2d(np.asarray(band_signals, dtype=float))
        n = X.shape[1] if length is None else length
        n_fft = self.n_fft_for(X.shape[1])
        spec = sp_fft.rfft(X, n_fft, axis=1)
        out = sp_fft.irfft(np.sum(spec * self.weights(n_fft), axis=0), n_fft)
        return out[:n]

    def highpass(self, x, length=None):
        """Apply the bank's overall response (unity except the DC roll-off)."""
        x = np.asarray(x, dtype=float)
        if not self.block_dc:
            return x[:length].copy()
        n_fft = self.n_fft_for(len(x))
        total = np.sum(self.weights(n_fft), axis=0)
        out = sp_fft.irfft(sp_fft.rfft(x, n_fft) * total, n_fft)
        return out[: len(x) if length is None else length]

    def decompose(self, x):
        """Split ``x`` into band signals; the rows sum back to ``highpass(x)``."""
        x = np.asarray(x, dtype=float)
        n_fft = self.n_fft_for(len(x))
        spec = sp_fft.rfft(x, n_fft)
        bands = sp_fft.irfft(spec[None, :] * self.weights(n_fft), n_fft, axis=1)
        return bands[:, : len(x)]
