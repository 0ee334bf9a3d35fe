"""Image-source enumeration for shoebox and general polygonal-prism rooms."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..exceptions import ValidationError
from ..scene.geometry import distance_to_segments, points_in_polygon, segment_crosses_edges
from ..scene.materials import OCTAVE_BANDS


@dataclass(frozen=True, eq=False)
class ImageSource:
    position: np.ndarray
    reflection_order: int
    surface_sequence: tuple
    gains: np.ndarray  # cumulative amplitude factor per band
    bands: tuple = OCTAVE_BANDS

    @property
    def cumulative_reflection_gain_per_band(self):
        return dict(zip(self.bands, self.gains.tolist()))


@dataclass(frozen=True, eq=False)
class ImageSet:
    """Column-oriented collection of image sources.

    ``departure`` holds, per image, the linear map taking the arrival
    direction at the microphone back to the launch direction at the source
    (the product of the wall reflections along the path).
    """

    positions: np.ndarray  # (n, 3)
    orders: np.ndarray  # (n,)
    gains: np.ndarray  # (n, n_bands)
    departure: np.ndarray  # (n, 3, 3), or (n, 3) when the map is diagonal
    sequences: Optional[list] = None
    counts: Optional[np.ndarray] = None  # (n, n_surfaces) reflection counts
    bands: tuple = OCTAVE_BANDS

    def __len__(self):
        return len(self.positions)

    def sequence(self, i):
        if self.sequences is not None:
            return tuple(self.sequences[i])
        # canonical order for lattice images: per axis, alternate between the
        # two opposing walls; the true interleaving across axes depends on the mic
        seq = []
        c = self.counts[i]
        for lo, hi in self._pairs:
            a, b = int(c[lo]), int(c[hi])
            first, second = (lo, hi) if a >= b else (hi, lo)
            for k in range(a + b):
                seq.append(first if k % 2 == 0 else second)
        return tuple(seq)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i):
        return ImageSource(
            self.positions[i], int(self.orders[i]), self.sequence(i), self.gains[i], self.bands
        )

    def to_list(self):
        return list(self)

    def select(self, mask):
        """Subset by boolean mask, index array or slice."""
        if isinstance(mask, slice):
            seqs = None if self.sequences is None else self.sequences[mask]
        else:
            mask = np.asarray(mask)
            if mask.dtype == bool:
                mask = np.flatnonzero(mask)
            seqs = None if self.sequences is None else [self.sequences[i] for i in mask]
        out = ImageSet(
            self.positions[mask], self.orders[mask], self.gains[mask], self.departure[mask],
            seqs, None if self.counts is None else self.counts[mask], self.bands,
        )
        if hasattr(self, "_pairs"):
            object.__setattr__(out, "_pairs", self._pairs)
        return out


def _shoebox_walls(room):
    """Surface ids of the (low, high) wall on each axis."""
    pairs = []
    for axis in range(3):
        lo = hi = None
        for s in room.surfaces:
            if abs(abs(s.normal[axis]) - 1.0) < 1e-12:
                if s.normal[axis] < 0:
                    lo = s.id
                else:
                    hi = s.id
        pairs.append((lo, hi))
    return pairs


def enumerate_images_shoebox(room, source, max_order, bands=OCTAVE_BANDS):
    """All lattice images of ``source`` with total reflection order <= ``max_order``."""
    if not room.is_shoebox:
        raise ValidationError("shoebox enumeration needs an axis-aligned box room")
    if max_order < 0:
        raise ValidationError("max_order must be non-negative", "max_order")
    src = np.asarray(source, dtype=float)
    lo, hi = room.bbox
    L = hi - lo
    rel = src - lo

    N = _lattice(max_order)
    orders = np.abs(N).sum(axis=1)

    odd = (N % 2) != 0
    pos = lo + N * L + np.where(odd, L - rel, rel)

    pairs = _shoebox_walls(room)
    n_surf = len(room.surfaces)
    counts = np.zeros((len(N), n_surf), dtype=np.int32)
    for axis, (s_lo, s_hi) in enumerate(pairs):
        n = N[:, axis]
        up = (np.abs(n) + 1) // 2
        down = np.abs(n) // 2
        counts[:, s_hi] = np.where(n > 0, up, down)
        counts[:, s_lo] = np.where(n > 0, down, up)

    A = room.absorption(bands)  # (S, B)
    if np.all(A == A[0]):
        gains = np.sqrt(1.0 - A[0])[None, :] ** orders[:, None]
    else:
        with np.errstate(divide="ignore"):
            log_r = 0.5 * np.log1p(-A)  # log sqrt(1 - alpha); -inf for alpha == 1
        gains = _gains_from_counts(counts, log_r)

    signs = np.where(odd, -1.0, 1.0)  # diagonal of the departure map
    out = ImageSet(pos, orders, gains, signs, None, counts, tuple(bands))
    object.__setattr__(out, "_pairs", pairs)
    return out


def _lattice(max_order):
    """Integer triples with L1 norm <= max_order, sorted by (order, nx, ny, nz)."""
    blocks = []
    for nx in range(-max_order, max_order + 1):
        rem = max_order - abs(nx)
        ny = np.arange(-rem, rem + 1)
        span = rem - np.abs(ny)
        ny_rep = np.repeat(ny, 2 * span + 1)
        nz = np.concatenate([np.arange(-k, k + 1) for k in span])
        blocks.append(np.column_stack([np.full(len(nz), nx), ny_rep, nz]))
    N = np.vstack(blocks)
    idx = np.lexsort((N[:, 2], N[:, 1], N[:, 0], np.abs(N).sum(axis=1)))
    return N[idx]


def _gains_from_counts(counts, log_r):
    gains = np.ones((counts.shape[0], log_r.shape[1]))
    for s in range(counts.shape[1]):
        c = counts[:, s]
        if not np.any(c):
            continue
        with np.errstate(invalid="ignore"):
            term = np.where(c[:, None] > 0, np.exp(c[:, None] * log_r[s][None, :]), 1.0)
        gains *= term
    return gains


def _point_on_surface(room, surf, q, tol=1e-9):
    if surf.name in ("floor", "ceiling"):
        q2 = q[None, :2]
        return bool(points_in_polygon(q2, room.floor_vertices)[0]) or bool(
            distance_to_segments(q2, room.floor_vertices)[0] <= tol
        )
    if q[2] < -tol or q[2] > room.height + tol:
        return False
    a = surf.vertices[0, :2]
    b = surf.vertices[1, :2]
    e = b - a
    t = np.dot(q[:2] - a, e) / np.dot(e, e)
    return -tol <= t <= 1 + tol


def _segment_inside(room, p, q, skip_edges=()):
    if segment_crosses_edges(p, q, room.floor_vertices, skip=skip_edges):
        return False
    m = 0.5 * (np.asarray(p) + np.asarray(q))
    m2 = m[None, :2]
    return bool(points_in_polygon(m2, room.floor_vertices)[0]) or bool(
        distance_to_segments(m2, room.floor_vertices)[0] <= 1e-9
    )


def is_visible(room, source, mic, chain, sequence):
    """Check that the unfolded path from ``mic`` back to ``source`` is physical.

    ``chain[j]`` is the image after ``j + 1`` mirrorings, ``sequence[j]`` the
    surface id of that mirroring. The path must pierce every generating
    surface inside its bounds and stay inside the room between bounces.
    """
    p = np.asarray(mic, dtype=float)
    prev_surface = None
    for j in range(len(sequence) - 1, -1, -1):
        surf = room.surfaces[sequence[j]]
        img = chain[j]
        sd_p = surf.signed_distance(p)
        sd_i = surf.signed_distance(img)
        if sd_p >= -1e-12 or sd_i <= 1e-12:
            return False
        t = sd_p / (sd_p - sd_i)
        q = p + t * (img - p)
        if not _point_on_surface(room, surf, q):
            return False
        if not _segment_inside(room, p, q):
            return False
        p = q
        prev_surface = surf
    if prev_surface is not None and prev_surface.signed_distance(source) >= 0:
        return False
    return _segment_inside(room, p, source)


def enumerate_images_general(room, source, mic, max_order, bands=OCTAVE_BANDS):
    """Images of ``source`` in any polygonal prism, filtered by visibility from ``mic``."""
    if max_order < 0:
        raise ValidationError("max_order must be non-negative", "max_order")
    src = np.asarray(source, dtype=float)
    mic = np.asarray(mic, dtype=float)
    A = room.absorption(bands)
    refl = np.sqrt(1.0 - A)  # (S, B)
    S = len(room.surfaces)
    R = [np.eye(3) - 2.0 * np.outer(s.normal, s.normal) for s in room.surfaces]

    positions, orders, gains, deps, seqs = [], [], [], [], []
    if is_visible(room, src, mic, (), ()):  # the direct path can be occluded too
        positions.append(src)
        orders.append(0)
        gains.append(np.ones(len(bands)))
        deps.append(np.eye(3))
        seqs.append(())

    # each node: (chain of images, sequence, gain, departure)
    frontier = [((), (), np.ones(len(bands)), np.eye(3))]
    for order in range(1, max_order + 1):
        nxt = []
        for chain, seq, g, dep in frontier:
            last = chain[-1] if chain else src
            for s in range(S):
                if seq and seq[-1] == s:
                    continue
                surf = room.surfaces[s]
                if surf.signed_distance(last) >= -1e-12:
                    continue  # image must lie in front of the mirror plane
                img = surf.mirror(last)
                node = (chain + (img,), seq + (s,), g * refl[s], dep @ R[s])
                nxt.append(node)
                if is_visible(room, src, mic, node[0], node[1]):
                    positions.append(img)
                    orders.append(order)
                    gains.append(node[2])
                    deps.append(node[3])
                    seqs.append(node[1])
        frontier = nxt

    return ImageSet(
        np.array(positions).reshape(-1, 3), np.array(orders, dtype=int), np.array(gains).reshape(-1, len(bands)),
        np.array(deps).reshape(-1, 3, 3), seqs, None, tuple(bands),
    )
