"""Small input-checking helpers in the spirit of ``sklearn.utils.validation``."""

import numpy as np

from .exceptions import ValidationError


def check_point(p, dim=3, name="point"):
    arr = np.asarray(p, dtype=float)
    if arr.shape != (dim,):
        raise ValidationError(f"expected a {dim}-vector, got shape {arr.shape}", name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("contains non-finite values", name)
    return arr


def check_points(P, dim=3, name="points"):
    arr = np.asarray(P, dtype=float)
    if arr.ndim == 1 and arr.size == dim:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValidationError(f"expected shape (n, {dim}), got {arr.shape}", name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("contains non-finite values", name)
    return arr


def check_signal(x, name="signal", allow_empty=False):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"expected a 1-D signal, got shape {arr.shape}", name)
    if not allow_empty and arr.size == 0:
        raise ValidationError("signal is empty", name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("contains non-finite values", name)
    return arr


def check_unit_vector(v, name="orientation", tol=1e-9):
    arr = check_point(v, 3, name)
    n = np.linalg.norm(arr)
    if abs(n - 1.0) > tol:
        raise ValidationError(f"must have unit norm, got {n:.12g}", name)
    return arr


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"must be positive, got {value!r}", name)
    return value


def check_fraction(value, name):
    if not (0.0 <= value <= 1.0):
        raise ValidationError(f"must lie in [0, 1], got {value!r}", name)
    return float(value)


def normalize(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValidationError("cannot normalize a zero vector")
    return v / n
