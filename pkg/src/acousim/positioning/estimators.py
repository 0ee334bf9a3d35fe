"""Scikit-learn wrappers around TOF picking and multilateration."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import ValidationError
from .solvers import METHODS, AnchorSet, multilaterate
from .tof import estimate_tof


class TofEstimator(TransformerMixin, BaseEstimator):
    """Map envelopes (one per row) to ranges in metres."""

    def __init__(self, sample_rate=250000.0, sound_speed=343.0, mode="max",
                 min_prominence=0.3, interpolate=False, offset_s=0.0):
        self.sample_rate = sample_rate
        self.sound_speed = sound_speed
        self.mode = mode
        self.min_prominence = min_prominence
        self.interpolate = interpolate
        self.offset_s = offset_s

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        return np.array([
            estimate_tof(row, self.mode, self.min_prominence, self.sample_rate, self.sound_speed,
                         interpolate=self.interpolate, offset_s=self.offset_s).range_m
            for row in X
        ])


class Multilaterator(RegressorMixin, BaseEstimator):
    """Predict 3-D positions from rows of ranges to fixed anchors.

    ``anchors`` is an ``(n_anchors, 3)`` array or an :class:`AnchorSet`;
    ``fit`` only validates it against the width of ``X``. ``predict`` returns
    ``(n_samples, 3)`` and stores per-row residuals and convergence flags.
    """

    def __init__(self, anchors=None, method="gauss_newton"):
        self.anchors = anchors
        self.method = method

    def fit(self, X, y=None):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}", "method")
        if self.anchors is None:
            raise ValidationError("anchors are required", "anchors")
        anchors = self.anchors if isinstance(self.anchors, AnchorSet) else AnchorSet.from_array(self.anchors)
        X = check_array(X)
        if X.shape[1] != len(anchors):
            raise ValidationError(f"X has {X.shape[1]} columns, expected {len(anchors)}", "X")
        self.anchors_ = anchors
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "anchors_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}", "X")
        results = [multilaterate(self.anchors_, row, self.method) for row in X]
        self.residual_rms_ = np.array([r.residual_rms for r in results])
        self.converged_ = np.array([r.converged for r in results])
        return np.array([r.position for r in results]).reshape(-1, 3)
