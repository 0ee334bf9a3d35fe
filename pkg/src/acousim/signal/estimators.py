"""scikit-learn transformers for the post-processing chain.

Each transformer works row-wise on a 2-D array of equally long signals, so
they compose in a :class:`sklearn.pipeline.Pipeline`::

    make_ranging_pipeline(template, 250_000, snr_db=30, random_state=0)
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.pipeline import Pipeline
from sklearn.utils import check_array, check_random_state

from .compression import agc, envelope, fixed_size_downsample, matched_filter
from .noise import add_awgn


class _Stateless(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        return self

    def _rows(self, X):
        return check_array(X)


class NoiseInjector(_Stateless):
    def __init__(self, snr_db=30.0, random_state=None):
        self.snr_db = snr_db
        self.random_state = random_state

    def transform(self, X):
        X = self._rows(X)
        rng = check_random_state(self.random_state)
        gen = np.random.default_rng(rng.randint(0, 2**31 - 1))
        return np.vstack([add_awgn(x, self.snr_db, gen) for x in X])


class PulseCompressor(_Stateless):
    def __init__(self, template=None, one_bit=False, use_agc=False):
        self.template = template
        self.one_bit = one_bit
        self.use_agc = use_agc

    def transform(self, X):
        X = self._rows(X)
        return np.vstack(
            [matched_filter(agc(x) if self.use_agc else x, self.template, self.one_bit) for x in X]
        )


class EnvelopeDetector(_Stateless):
    def __init__(self, sample_rate=250_000.0, cutoff_hz=5_000.0):
        self.sample_rate = sample_rate
        self.cutoff_hz = cutoff_hz

    def transform(self, X):
        X = self._rows(X)
        return np.vstack([envelope(x, self.cutoff_hz, self.sample_rate).samples for x in X])


class FixedLengthDownsampler(_Stateless):
    def __init__(self, target_length=1000):
        self.target_length = target_length

    def transform(self, X):
        X = self._rows(X)
        return np.vstack([fixed_size_downsample(x, self.target_length).samples for x in X])


def make_ranging_pipeline(template, sample_rate, snr_db=None, cutoff_hz=5_000.0, one_bit=False,
                          use_agc=False, fixed_length=None, random_state=None):
    steps = []
    if snr_db is not None:
        steps.append(("noise", NoiseInjector(snr_db, random_state)))
    steps.append(("compress", PulseCompressor(template, one_bit, use_agc)))
    steps.append(("envelope", EnvelopeDetector(sample_rate, cutoff_hz)))
    if fixed_length is not None:
        steps.append(("downsample", FixedLengthDownsampler(fixed_length)))
    return Pipeline(steps)
