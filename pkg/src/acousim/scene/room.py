"""Flat-ceiling polygonal-prism rooms.

A room is described by its floor polygon, a height, and either one material
per surface or a target reverberation time (shoebox rooms only). Surfaces are
numbered walls first, in floor-vertex order (wall ``i`` runs from vertex ``i``
to vertex ``i + 1``), then the floor, then the ceiling.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .._validation import check_fraction
from ..exceptions import (
    AbsorptionOutOfRange,
    NonPositiveHeight,
    RT60OnNonShoebox,
    SelfIntersectingPolygon,
    ValidationError,
)
from .geometry import distance_to_segments, is_simple_polygon, points_in_polygon, signed_area
from .materials import OCTAVE_BANDS, Material, get_material

SABINE_CONSTANT = 0.1611  # s/m, 24 ln(10) / 343


@dataclass(frozen=True)
class Environment:
    temperature_c: float = 20.0
    relative_humidity: float = 0.5

    def __post_init__(self):
        if not (-20.0 <= self.temperature_c <= 50.0):
            raise ValidationError(
                f"temperature {self.temperature_c} degC outside [-20, 50]", "environment.temperature_c"
            )
        check_fraction(self.relative_humidity, "environment.relative_humidity")

    @property
    def sound_speed(self):
        from ..propagation.physics import speed_of_sound

        return speed_of_sound(self.temperature_c)


@dataclass(frozen=True)
class RoomSpec:
    """Unvalidated room description.

    ``materials`` is either a single material used for every surface, a list
    with one entry per surface, or a mapping from surface name (``wall0``,
    ``wall1``, ..., ``floor``, ``ceiling``, or ``walls`` as a fallback for all
    walls) to material. Entries may be :class:`Material` objects, library
    names, or scalar absorptions.
    """

    floor_vertices: tuple
    height: float
    materials: object = None
    rt60_target: Optional[float] = None
    environment: Environment = field(default_factory=Environment)


@dataclass(frozen=True, eq=False)
class Surface:
    id: int
    name: str
    normal: np.ndarray  # outward unit normal
    offset: float  # plane: normal . x == offset
    vertices: np.ndarray  # (k, 3) polygon
    area: float
    material: Material

    def signed_distance(self, p):
        """Positive outside the room, negative inside."""
        return np.asarray(p, dtype=float) @ self.normal - self.offset

    def mirror(self, p):
        p = np.asarray(p, dtype=float)
        return p - 2.0 * np.asarray(self.signed_distance(p))[..., None] * self.normal

    def reflect_direction(self, d):
        d = np.asarray(d, dtype=float)
        return d - 2.0 * np.asarray(d @ self.normal)[..., None] * self.normal


@dataclass(frozen=True, eq=False)
class Room:
    """Validated, immutable room with precomputed surface planes."""

    floor_vertices: np.ndarray
    height: float
    surfaces: tuple
    environment: Environment
    rt60_target: Optional[float] = None
    max_order_hint: Optional[int] = None

    @property
    def n_walls(self):
        return len(self.floor_vertices)

    @property
    def floor_area(self):
        return abs(signed_area(self.floor_vertices))

    @property
    def volume(self):
        return self.floor_area * self.height

    @property
    def total_area(self):
        return float(sum(s.area for s in self.surfaces))

    @property
    def bbox(self):
        lo = np.append(self.floor_vertices.min(axis=0), 0.0)
        hi = np.append(self.floor_vertices.max(axis=0), self.height)
        return lo, hi

    @property
    def is_shoebox(self):
        return is_axis_aligned_rectangle(self.floor_vertices)

    @property
    def dimensions(self):
        lo, hi = self.bbox
        return hi - lo

    @property
    def sound_speed(self):
        return self.environment.sound_speed

    def absorption(self, bands=OCTAVE_BANDS):
        """(n_surfaces, n_bands) matrix of energy absorption coefficients."""
        return np.vstack([s.material.coefficients(bands) for s in self.surfaces])

    def has_uniform_material(self, bands=OCTAVE_BANDS):
        A = self.absorption(bands)
        return bool(np.all(A == A[0]))

    def contains(self, points, margin=0.0):
        """Vectorised :func:`point_in_room`."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        inside = points_in_polygon(P, self.floor_vertices) & (P[:, 2] > 0) & (P[:, 2] < self.height)
        if margin > 0:
            tol = 1e-9
            inside &= distance_to_segments(P, self.floor_vertices) >= margin - tol
            inside &= (P[:, 2] >= margin - tol) & (P[:, 2] <= self.height - margin + tol)
        return inside

    def surface(self, name):
        for s in self.surfaces:
            if s.name == name:
                return s
        raise KeyError(name)


def is_axis_aligned_rectangle(vertices):
    v = np.asarray(vertices, dtype=float)
    if len(v) != 4:
        return False
    for i in range(4):
        d = v[(i + 1) % 4] - v[i]
        if not (abs(d[0]) < 1e-12 or abs(d[1]) < 1e-12):
            return False
    xs = np.unique(np.round(v[:, 0], 12))
    ys = np.unique(np.round(v[:, 1], 12))
    return len(xs) == 2 and len(ys) == 2


def _surface_materials(materials, n_walls):
    names = [f"wall{i}" for i in range(n_walls)] + ["floor", "ceiling"]
    if materials is None:
        raise ValidationError("either materials or rt60_target must be given", "room")
    if isinstance(materials, (list, tuple)):
        if len(materials) != len(names):
            raise ValidationError(
                f"expected {len(names)} surface materials, got {len(materials)}", "materials"
            )
        return [get_material(m) for m in materials]
    if isinstance(materials, dict) and not ("absorption" in materials):
        unknown = set(materials) - set(names) - {"walls", "default"}
        if unknown:
            raise ValidationError(f"unknown surfaces {sorted(unknown)}", "materials")
        out = []
        for n in names:
            spec = materials.get(n)
            if spec is None and n.startswith("wall"):
                spec = materials.get("walls")
            if spec is None:
                spec = materials.get("default")
            if spec is None:
                raise ValidationError("no material given", f"materials.{n}")
            out.append(get_material(spec))
        return out
    m = get_material(materials)
    return [m] * len(names)


def validate_room(spec: RoomSpec) -> Room:
    """Check a :class:`RoomSpec` and precompute planes, normals, areas and volume."""
    v = np.asarray(spec.floor_vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise ValidationError(f"floor vertices must be (n, 2), got {v.shape}", "room.floor_vertices")
    if not is_simple_polygon(v):
        raise SelfIntersectingPolygon("floor polygon is not simple", "room.floor_vertices")
    if not (spec.height > 0):
        raise NonPositiveHeight(f"height must be positive, got {spec.height}", "room.height")
    H = float(spec.height)
    n = len(v)
    ccw = signed_area(v) > 0

    if spec.rt60_target is not None:
        if spec.materials is not None:
            raise ValidationError("give either materials or rt60_target, not both", "room")
        if not is_axis_aligned_rectangle(v):
            raise RT60OnNonShoebox(
                "rt60_target is only supported for shoebox rooms", "room.rt60_target"
            )
        if not (spec.rt60_target > 0):
            raise ValidationError("rt60_target must be positive", "room.rt60_target")
        area = abs(signed_area(v))
        perimeter = float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))
        alpha, order = _inverse_sabine(
            spec.rt60_target, area * H, 2 * area + perimeter * H, _dims(v, H),
            spec.environment.sound_speed,
        )
        mats = [Material.uniform(f"sabine_{spec.rt60_target:g}s", alpha)] * (n + 2)
        max_order = order
    else:
        mats = _surface_materials(spec.materials, n)
        max_order = None

    surfaces = []
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        e = b - a
        length = float(np.hypot(*e))
        nrm2 = np.array([e[1], -e[0]]) / length
        if not ccw:
            nrm2 = -nrm2
        normal = np.array([nrm2[0], nrm2[1], 0.0])
        verts = np.array([[a[0], a[1], 0.0], [b[0], b[1], 0.0], [b[0], b[1], H], [a[0], a[1], H]])
        surfaces.append(
            Surface(i, f"wall{i}", normal, float(normal[:2] @ a), verts, length * H, mats[i])
        )
    floor_verts = np.column_stack([v, np.zeros(n)])
    ceil_verts = np.column_stack([v, np.full(n, H)])
    area = abs(signed_area(v))
    surfaces.append(Surface(n, "floor", np.array([0.0, 0.0, -1.0]), 0.0, floor_verts, area, mats[n]))
    surfaces.append(Surface(n + 1, "ceiling", np.array([0.0, 0.0, 1.0]), H, ceil_verts, area, mats[n + 1]))

    return Room(
        floor_vertices=v.copy(),
        height=H,
        surfaces=tuple(surfaces),
        environment=spec.environment,
        rt60_target=spec.rt60_target,
        max_order_hint=max_order,
    )


def _dims(v, H):
    span = v.max(axis=0) - v.min(axis=0)
    return (float(span[0]), float(span[1]), float(H))


def _inverse_sabine(rt60, volume, area, dims, c):
    alpha = SABINE_CONSTANT * volume / (area * rt60)
    if alpha >= 1.0:
        raise AbsorptionOutOfRange(
            f"rt60={rt60} s needs absorption {alpha:.3f} >= 1; room too small or RT60 too short",
            "room.rt60_target",
        )
    # smallest order whose image lattice contains every image within c * rt60
    max_order = int(math.ceil(c * rt60 * math.sqrt(sum(1.0 / L**2 for L in dims))))
    return alpha, max_order


def inverse_sabine(rt60, room):
    """Uniform absorption and ISM order that realise ``rt60`` in a shoebox room.

    Returns ``(alpha, max_order)`` where ``alpha = 0.1611 V / (S rt60)``.
    """
    if not room.is_shoebox:
        raise RT60OnNonShoebox("inverse Sabine needs a shoebox room")
    if not (rt60 > 0):
        raise ValidationError("rt60 must be positive", "rt60")
    return _inverse_sabine(
        rt60, room.volume, room.total_area, _dims(room.floor_vertices, room.height), room.sound_speed
    )


def sabine_rt60(room, alpha):
    """Forward Sabine formula for a uniform absorption coefficient."""
    return SABINE_CONSTANT * room.volume / (room.total_area * alpha)


def point_in_room(p, room, margin=0.0):
    """True iff ``p`` lies strictly inside the prism (and at least ``margin`` from walls)."""
    return bool(room.contains(np.asarray(p, dtype=float)[None, :], margin)[0])


def shoebox(dims, materials=None, rt60_target=None, environment=None, origin=(0.0, 0.0)):
    """Convenience constructor for an axis-aligned box."""
    lx, ly, lz = dims
    ox, oy = origin
    verts = ((ox, oy), (ox + lx, oy), (ox + lx, oy + ly), (ox, oy + ly))
    return validate_room(
        RoomSpec(verts, lz, materials, rt60_target, environment or Environment())
    )
