"""Stochastic specular ray tracing producing a time/energy histogram per band."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DirectionalTransducerUnsupported, MixedMaterialsUnsupported, ValidationError
from ..scene.geometry import distance_to_segments, points_in_polygon
from ..scene.materials import OCTAVE_BANDS
from .rir import _unpack, air_coefficients


@dataclass(frozen=True, eq=False)
class RayHistogram:
    """Energy per time bin (rows) and band (columns); bin width is ``1 / sample_rate_hz``."""

    energy: np.ndarray
    sample_rate_hz: float
    bands: tuple = OCTAVE_BANDS

    @property
    def total_energy(self):
        return float(self.energy.sum())

    def nonzero_bins(self):
        return np.flatnonzero(self.energy.sum(axis=1) > 0)

    def after(self, t0):
        """Copy with every bin before time ``t0`` (s) cleared."""
        e = self.energy.copy()
        e[: int(np.ceil(t0 * self.sample_rate_hz))] = 0.0
        return RayHistogram(e, self.sample_rate_hz, self.bands)

    def to_signal(self, filterbank, seed=0, smoothing_s=5e-4, length=None):
        """Band-filtered Gaussian noise whose local power follows the histogram."""
        n = len(self.energy) if length is None else length
        if not np.any(self.energy):
            return np.zeros(n)
        rng = np.random.default_rng(seed)
        win = max(1, int(round(smoothing_s * self.sample_rate_hz)))
        kernel = np.ones(win) / win
        bands = np.empty((len(self.bands), n))
        for b in range(len(self.bands)):
            env = np.convolve(self.energy[:n, b], kernel, mode="same")
            bands[b] = rng.standard_normal(n) * np.sqrt(np.maximum(env, 0.0))
        return filterbank.combine(bands, n)


def _hit_fraction(D, r):
    """Exact fraction of launch directions that meet a sphere of radius r at distance D."""
    x = np.clip(r / D, 0.0, 1.0)
    return 0.5 * (1.0 - np.sqrt(1.0 - x * x))


def _surface_intersections(room, pos, dirs, current):
    """Distance along each ray to the first surface it meets."""
    n = len(pos)
    best_t = np.full(n, np.inf)
    best_s = np.full(n, -1, dtype=np.int64)
    verts = room.floor_vertices
    for s in room.surfaces:
        denom = dirs @ s.normal
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (s.offset - pos @ s.normal) / denom
        ok = (denom > 1e-12) & (t > 1e-9) & (current != s.id) & (t < best_t)
        if not np.any(ok):
            continue
        idx = np.flatnonzero(ok)
        q = pos[idx] + t[idx, None] * dirs[idx]
        if s.name in ("floor", "ceiling"):
            inside = points_in_polygon(q, verts) | (distance_to_segments(q, verts) <= 1e-9)
        else:
            a = s.vertices[0, :2]
            e = s.vertices[1, :2] - a
            u = ((q[:, :2] - a) @ e) / (e @ e)
            inside = (u >= -1e-9) & (u <= 1 + 1e-9) & (q[:, 2] >= -1e-9) & (q[:, 2] <= room.height + 1e-9)
        idx = idx[inside]
        best_t[idx] = t[idx]
        best_s[idx] = s.id
    return best_t, best_s


def trace_rays(room, source, mic, n_rays=10_000, rng_seed=0, sample_rate=250_000, mic_radius=0.25,
               energy_cutoff=1e-7, max_time=None, bands=None, air_absorption=True):
    """Launch ``n_rays`` uniformly distributed rays and histogram energy at the mic sphere.

    Each hit deposits the image-source energy of its unfolded path, divided by
    the probability that a uniformly launched ray reaches a sphere at that
    distance, so the histogram is an unbiased estimate of the image-source
    energy arrivals.
    """
    from .rir import bands_for_rate

    bands = tuple(bands) if bands is not None else bands_for_rate(sample_rate)
    src, src_dir = _unpack(source)
    mic_pos, mic_dir = _unpack(mic)
    if (src_dir is not None and not src_dir.is_omni) or (mic_dir is not None and not mic_dir.is_omni):
        raise DirectionalTransducerUnsupported("ray tracing supports omnidirectional devices only")
    if not room.has_uniform_material(bands):
        raise MixedMaterialsUnsupported("ray tracing needs one material on every surface")
    if n_rays < 1:
        raise ValidationError("n_rays must be positive", "n_rays")
    if np.linalg.norm(src - mic_pos) <= mic_radius:
        raise ValidationError("source lies inside the microphone detection sphere")

    c = room.sound_speed
    alpha = room.surfaces[0].material.coefficients(bands)
    air = air_coefficients(bands, room.environment, air_absorption)
    if max_time is None:
        max_time = room.rt60_target * 1.2 if room.rt60_target else 1.0
    max_dist = c * max_time
    n_bins = int(np.ceil(max_time * sample_rate)) + 1
    hist = np.zeros((n_bins, len(bands)))

    rng = np.random.default_rng(rng_seed)
    dirs = rng.standard_normal((n_rays, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pos = np.repeat(src[None, :], n_rays, axis=0)
    travelled = np.zeros(n_rays)
    rho = np.ones((n_rays, len(bands)))
    current = np.full(n_rays, -1, dtype=np.int64)
    norm = 1.0 / (16.0 * np.pi**2 * n_rays)
    normals = np.array([s.normal for s in room.surfaces])
    refl = 1.0 - alpha

    while len(pos):
        t, surf = _surface_intersections(room, pos, dirs, current)
        lost = surf < 0  # numerical escape through an edge; drop the ray
        if np.any(lost):
            keep = ~lost
            pos, dirs, travelled, rho, current, t, surf = (
                pos[keep], dirs[keep], travelled[keep], rho[keep], current[keep], t[keep], surf[keep]
            )
            if not len(pos):
                break

        rel = mic_pos[None, :] - pos
        s_close = np.clip(np.sum(rel * dirs, axis=1), 0.0, t)
        miss = rel - s_close[:, None] * dirs
        hit = np.sum(miss * miss, axis=1) < mic_radius**2
        if np.any(hit):
            D = travelled[hit] + np.linalg.norm(rel[hit], axis=1)
            w = norm / (D**2 * _hit_fraction(D, mic_radius))
            e = rho[hit] * w[:, None] * np.exp(-2.0 * np.outer(D, air))
            bins = np.round(D / c * sample_rate).astype(np.int64)
            ok = bins < n_bins
            for b in range(len(bands)):
                hist[:, b] += np.bincount(bins[ok], e[ok, b], minlength=n_bins)

        pos = pos + t[:, None] * dirs
        travelled = travelled + t
        n = normals[surf]
        dirs = dirs - 2.0 * np.sum(dirs * n, axis=1)[:, None] * n
        rho = rho * refl[None, :]
        current = surf
        alive = (rho.max(axis=1) >= energy_cutoff) & (travelled < max_dist)
        pos, dirs, travelled, rho, current = pos[alive], dirs[alive], travelled[alive], rho[alive], current[alive]

    return RayHistogram(hist, float(sample_rate), bands)
