"""Error metrics, empirical CDFs, reverberation-time measurement and plot-data export."""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyErrorSet, InsufficientDecayRange, MissingEstimate


@dataclass(frozen=True)
class ErrorRecord:
    mic_id: str
    true_position: tuple
    estimated_position: tuple
    euclidean_error_m: float
    method: str = ""


def compute_errors(truths, estimates, method=""):
    """Euclidean error per microphone.

    ``truths`` and ``estimates`` map mic id to a 3-D position; every true
    position needs an estimate. Records come back sorted by mic id.
    """
    missing = [k for k in truths if k not in estimates]
    if missing:
        raise MissingEstimate(f"no estimate for mic(s) {sorted(missing)[:5]}")
    out = []
    for mic_id in sorted(truths, key=str):
        t = np.asarray(truths[mic_id], dtype=float)
        e = np.asarray(estimates[mic_id], dtype=float)
        out.append(ErrorRecord(str(mic_id), tuple(t.tolist()), tuple(e.tolist()),
                               float(np.linalg.norm(t - e)), method))
    return out


def mean_euclidean_error(per_run_errors):
    """Mean over Monte-Carlo runs (columns) for each position (rows)."""
    return np.mean(np.atleast_2d(np.asarray(per_run_errors, dtype=float)), axis=1)


@dataclass(frozen=True, eq=False)
class Cdf:
    values: np.ndarray
    probabilities: np.ndarray

    def __call__(self, x):
        """F(x) = fraction of errors <= x (right-continuous step function)."""
        return np.searchsorted(self.values, x, side="right") / len(self.values)

    def percentile(self, q):
        """Smallest error e with F(e) >= q / 100."""
        q = np.asarray(q, dtype=float) / 100.0
        idx = np.clip(np.ceil(q * len(self.values)).astype(int) - 1, 0, len(self.values) - 1)
        return self.values[idx]

    def series(self):
        return [[float(v), float(p)] for v, p in zip(self.values, self.probabilities)]


def empirical_cdf(errors):
    e = np.sort(np.asarray(errors, dtype=float).ravel())
    if e.size == 0:
        raise EmptyErrorSet("cannot build a CDF from no errors")
    return Cdf(e, np.arange(1, e.size + 1) / e.size)


def energy_decay_curve(h):
    """Schroeder backward integral of the squared impulse response, in dB re. total."""
    h = np.asarray(h, dtype=float)
    edc = np.cumsum((h**2)[::-1])[::-1]
    nz = np.flatnonzero(edc > 0)
    if nz.size == 0:
        return np.array([])
    edc = edc[: nz[-1] + 1]
    return 10.0 * np.log10(edc / edc[0])


def schroeder_rt60(rir, sample_rate=None, fit_range=(-5.0, -25.0), min_samples=10):
    """RT60 extrapolated from a linear fit to the decay curve between -5 and -25 dB."""
    if sample_rate is None:
        h, fs = rir.samples, rir.sample_rate_hz
    else:
        h, fs = rir, float(sample_rate)
    edc = energy_decay_curve(h)
    hi, lo = fit_range
    if edc.size == 0 or edc.min() > lo - 5.0:
        raise InsufficientDecayRange("decay curve spans less than 30 dB")
    i0 = int(np.argmax(edc <= hi))
    i1 = int(np.argmax(edc <= lo))
    if i1 - i0 < min_samples:
        raise InsufficientDecayRange("too few samples in the fit range")
    t = np.arange(i0, i1 + 1) / fs
    slope, _ = np.polyfit(t, edc[i0 : i1 + 1], 1)
    if slope >= 0:
        raise InsufficientDecayRange("decay curve is not decreasing")
    return float(-60.0 / slope)


def export_error_map(records, room, out_dir, prefix="error_map"):
    """Write ``<prefix>.csv`` (x,y,z,error,method) and ``room_outline.csv``.

    The outline holds the closed floor polygon at z = 0 and z = height.
    """
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{prefix}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "z", "error", "method"])
        for r in records:
            x, y, z = r.true_position
            w.writerow([*(repr(float(v)) for v in (x, y, z, r.euclidean_error_m)), r.method])
    outline = out / "room_outline.csv"
    v = room.floor_vertices
    with open(outline, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "x", "y", "z"])
        for level, z in (("floor", 0.0), ("ceiling", room.height)):
            for p in list(v) + [v[0]]:
                w.writerow([level, repr(float(p[0])), repr(float(p[1])), repr(float(z))])
    return path, outline


def read_error_map(path):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((float(row["x"]), float(row["y"]), float(row["z"]), float(row["error"]), row["method"]))
    return rows


def cdf_plot_spec(cdfs):
    """JSON-ready ``{method: [[x, F(x)], ...]}`` for any plotting frontend."""
    return {"type": "cdf", "xlabel": "MED error (m)", "ylabel": "F(x)",
            "series": {m: c.series() for m, c in sorted(cdfs.items())}}


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
