"""Range extraction and multilateration."""

from .estimators import Multilaterator, TofEstimator
from .solvers import (
    METHODS,
    AnchorSet,
    PositionEstimate,
    bancroft,
    beck,
    cheung,
    gauss_newton,
    intersections,
    is_coplanar,
    multilaterate,
    range_cost,
    range_residual_rms,
    squared_range_cost,
)
from .tof import RangeEstimate, estimate_tof

__all__ = [
    "METHODS", "AnchorSet", "PositionEstimate", "RangeEstimate", "Multilaterator", "TofEstimator",
    "bancroft", "beck", "cheung", "gauss_newton", "intersections",
    "is_coplanar", "multilaterate", "range_cost", "range_residual_rms", "squared_range_cost",
    "estimate_tof",
]
