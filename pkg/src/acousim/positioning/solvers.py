"""Range-based 3-D multilateration.

Five solvers share one entry point, :func:`multilaterate`:

``gauss_newton``
    Iterative minimisation of ``sum_i (|x - a_i| - r_i)^2`` from the anchor
    centroid, with step halving so the cost never increases.
``bancroft``
    Bancroft's algebraic solution carried over from pseudoranges to ranges:
    the linear system ``a_i . x - |x|^2 / 2 = (|a_i|^2 - r_i^2) / 2`` is solved
    for ``x`` as a function of ``lambda = |x|^2 / 2``, and the quadratic
    ``|x(lambda)|^2 = 2 lambda`` picks ``lambda``. Coordinates are taken
    relative to the first anchor, which keeps the result translation
    equivariant.
``beck``
    Exact squared-range least squares (Beck, Stoica and Li): a generalized
    trust-region subproblem solved by bisection on its Lagrange multiplier.
``cheung``
    Constrained linear least squares (Cheung, So, Ma and Chan): the same
    problem, solved by diagonalising the constraint and finding the roots of
    the resulting polynomial in the multiplier.
``intersections``
    Every triple of spheres meets in up to two points; per triple the point
    that best fits the remaining ranges is kept. The kept points are averaged
    and refined by five Gauss-Newton steps. The name has no standard
    definition; this is our reading.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import eigh
from scipy.optimize import brentq

from .._validation import check_points
from ..exceptions import DegenerateGeometry, ValidationError

METHODS = ("intersections", "bancroft", "beck", "cheung", "gauss_newton")


@dataclass(frozen=True, eq=False)
class AnchorSet:
    ids: tuple
    positions: np.ndarray

    def __post_init__(self):
        pos = check_points(self.positions, 3, "anchors")
        object.__setattr__(self, "positions", pos)
        if len(self.ids) != len(pos):
            raise ValidationError("one id per anchor required", "anchors")
        if len(pos) < 4:
            raise ValidationError("at least 4 anchors needed for a 3-D fix", "anchors")
        if is_coplanar(pos):
            warnings.warn("anchors are (nearly) coplanar; fixes may be ambiguous", stacklevel=2)

    @classmethod
    def from_array(cls, positions):
        pos = np.asarray(positions, dtype=float)
        return cls(tuple(str(i) for i in range(len(pos))), pos)

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class PositionEstimate:
    position: np.ndarray
    method: str
    residual_rms: float
    converged: bool = True


def is_coplanar(anchors, rtol=1e-9):
    A = np.asarray(anchors, dtype=float)
    centered = A - A.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return len(s) < 3 or s[2] <= rtol * max(s[0], 1e-300)


def range_residual_rms(x, anchors, ranges):
    return float(np.sqrt(np.mean((np.linalg.norm(anchors - x, axis=1) - ranges) ** 2)))


def range_cost(x, anchors, ranges):
    return float(np.sum((np.linalg.norm(anchors - x, axis=1) - ranges) ** 2))


def squared_range_cost(x, anchors, ranges):
    return float(np.sum((np.sum((anchors - x) ** 2, axis=1) - ranges**2) ** 2))


def _require_full_rank(anchors):
    if is_coplanar(anchors):
        raise DegenerateGeometry("anchors are coplanar or coincident")


# Gauss-Newton ----------------------------------------------------------------

def gauss_newton(anchors, ranges, x0=None, max_iter=50, tol=1e-10):
    """Returns ``(x, converged)``."""
    x = anchors.mean(axis=0) if x0 is None else np.asarray(x0, dtype=float).copy()
    cost = range_cost(x, anchors, ranges)
    for _ in range(max_iter):
        diff = x - anchors
        dist = np.linalg.norm(diff, axis=1)
        J = np.where(dist[:, None] > 1e-15, diff / np.maximum(dist, 1e-300)[:, None], 0.0)
        res = dist - ranges
        step, *_ = np.linalg.lstsq(J, -res, rcond=None)
        t = 1.0
        while True:
            cand = x + t * step
            c = range_cost(cand, anchors, ranges)
            if c <= cost or t < 1e-9:
                break
            t *= 0.5
        if c > cost:
            return x, np.linalg.norm(step) < tol
        moved = np.linalg.norm(cand - x)
        x, cost = cand, c
        if moved < tol:
            return x, True
    return x, False


# Bancroft ----------------------------------------------------------------------

def _bancroft_step(anchors, ranges, origin):
    B = anchors - origin
    alpha = 0.5 * (np.sum(B * B, axis=1) - ranges**2)
    Bp = np.linalg.pinv(B)
    p = Bp @ alpha
    q = Bp @ np.ones(len(anchors))
    a, b, c = q @ q, 2.0 * (p @ q) - 2.0, p @ p
    disc = max(b * b - 4.0 * a * c, 0.0)  # a negative discriminant keeps the vertex
    qq = -0.5 * (b + np.copysign(np.sqrt(disc), b))
    lams = []
    if qq != 0:
        lams.append(c / qq)
    if a > 0:
        lams.append(qq / a)
    if not lams:
        raise DegenerateGeometry("Bancroft quadratic is degenerate")
    cands = [origin + p + lam * q for lam in lams]
    return min(cands, key=lambda x: range_cost(x, anchors, ranges))


def bancroft(anchors, ranges, max_passes=50, tol=1e-12):
    """Returns ``(x, converged)``."""
    _require_full_rank(anchors)
    scale = max(np.ptp(anchors, axis=0).max(), 1.0)
    x = anchors.mean(axis=0)
    for _ in range(max_passes):
        new = _bancroft_step(anchors, ranges, x)
        moved = np.linalg.norm(new - x)
        x = new
        if moved <= tol * scale:
            return x, True
    return x, False


# squared-range LS shared setup ---------------------------------------------------

def _srls_system(anchors, ranges):
    center = anchors.mean(axis=0)
    A0 = anchors - center
    G = np.column_stack([-2.0 * A0, np.ones(len(A0))])
    h = ranges**2 - np.sum(A0 * A0, axis=1)
    P = np.diag([1.0, 1.0, 1.0, 0.0])
    q = np.array([0.0, 0.0, 0.0, -0.5])
    GtG = G.T @ G
    if np.linalg.cond(GtG) > 1e14:
        raise DegenerateGeometry("anchors are coplanar or coincident")
    return center, G, h, P, q, GtG


def beck(anchors, ranges):
    """Minimise ``sum_i (|x - a_i|^2 - r_i^2)^2`` exactly."""
    center, G, h, P, q, GtG = _srls_system(anchors, ranges)
    Gth = G.T @ h

    def y_of(lam):
        return np.linalg.solve(GtG + lam * P, Gth - lam * q)

    def phi(lam):
        y = y_of(lam)
        return y @ P @ y + 2.0 * q @ y

    gam = eigh(P, GtG, eigvals_only=True)
    lower = -1.0 / gam.max()
    span = max(1.0, abs(lower))
    lo = lower + 1e-12 * span
    step = 1e-12 * span
    while phi(lo) < 0 and step < span:  # walk off the pole if phi is still negative
        step *= 10.0
        lo = lower + step
    hi = max(lo, 0.0) + 1.0
    while phi(hi) > 0:
        hi = hi * 2.0 + 1.0
        if hi > 1e12:
            raise DegenerateGeometry("Beck multiplier search diverged")
    lam = brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return center + y_of(lam)[:3]


def cheung(anchors, ranges):
    """Constrained LS via the eigen-decomposition of the constraint matrix."""
    center, G, h, P, q, GtG = _srls_system(anchors, ranges)
    gam, V = eigh(P, GtG)  # V.T GtG V = I, V.T P V = diag(gam)
    c = V.T @ (G.T @ h)
    e = V.T @ q

    one = Polynomial([1.0])
    lin = [Polynomial([1.0, g]) for g in gam]  # 1 + lambda * gamma_i
    num = [Polynomial([ci, -ei]) for ci, ei in zip(c, e)]  # c_i - lambda * e_i
    total = Polynomial([0.0])
    for i in range(len(gam)):
        others = one
        for k in range(len(gam)):
            if k != i:
                others = others * lin[k] ** 2
        total = total + others * (gam[i] * num[i] ** 2 + 2.0 * e[i] * num[i] * lin[i])
    total = total.trim(tol=0)

    def theta(lam):
        return V @ ((c - lam * e) / (1.0 + lam * gam))

    def g(lam):
        t = theta(lam)
        return t @ P @ t + 2.0 * q @ t

    roots = total.roots()
    scale = max(1.0, np.max(np.abs(roots))) if len(roots) else 1.0
    real = [r.real for r in roots if abs(r.imag) <= 1e-7 * scale]
    if not real:
        real = [r.real for r in roots]
    best, best_cost = None, np.inf
    for lam in real:
        if np.any(np.abs(1.0 + lam * gam) < 1e-14):
            continue
        for _ in range(3):  # polish on the rational constraint
            eps = 1e-7 * max(1.0, abs(lam))
            d = (g(lam + eps) - g(lam - eps)) / (2 * eps)
            if d == 0 or not np.isfinite(d):
                break
            lam = lam - g(lam) / d
        t = theta(lam)
        if abs(g(lam)) > 1e-6 * max(1.0, t[3]):
            continue
        cost = float(np.sum((G @ t - h) ** 2))
        if cost < best_cost:
            best, best_cost = t, cost
    if best is None:
        raise DegenerateGeometry("no admissible root of the Cheung polynomial")
    return center + best[:3]


# simple intersections ---------------------------------------------------------

def triple_intersections(anchors, ranges):
    """One point per anchor triple: the sphere intersection that best fits all ranges.

    When the spheres miss each other (noisy ranges) the point on the
    triple's plane closest to both candidates is used.
    """
    from itertools import combinations

    out = []
    for i, j, k in combinations(range(len(anchors)), 3):
        p1, p2, p3 = anchors[i], anchors[j], anchors[k]
        ex = p2 - p1
        d = np.linalg.norm(ex)
        if d < 1e-12:
            continue
        ex = ex / d
        t = p3 - p1
        i_ = ex @ t
        ey = t - i_ * ex
        ny = np.linalg.norm(ey)
        if ny < 1e-12:
            continue  # collinear triple
        ey = ey / ny
        ez = np.cross(ex, ey)
        r1, r2, r3 = ranges[i], ranges[j], ranges[k]
        x = (r1**2 - r2**2 + d**2) / (2 * d)
        y = (r1**2 - r3**2 + i_**2 + ny**2 - 2 * i_ * x) / (2 * ny)
        z = np.sqrt(max(r1**2 - x**2 - y**2, 0.0))
        base = p1 + x * ex + y * ey
        cands = [base + z * ez, base - z * ez]
        out.append(min(cands, key=lambda c: range_cost(c, anchors, ranges)))
    if not out:
        raise DegenerateGeometry("every anchor triple is collinear")
    return np.array(out)


def intersections(anchors, ranges, refine_steps=5):
    _require_full_rank(anchors)
    x0 = triple_intersections(anchors, ranges).mean(axis=0)
    x, _ = gauss_newton(anchors, ranges, x0=x0, max_iter=refine_steps, tol=0.0)
    return x


def multilaterate(anchors, ranges, method="gauss_newton"):
    """Estimate a 3-D position from ranges to four or more anchors."""
    if isinstance(anchors, AnchorSet):
        A = anchors.positions
    else:
        A = check_points(anchors, 3, "anchors")
    r = np.asarray([getattr(x, "range_m", x) for x in ranges], dtype=float)
    if len(A) < 4:
        raise ValidationError("at least 4 anchors needed", "anchors")
    if r.shape != (len(A),):
        raise ValidationError(f"expected {len(A)} ranges, got {r.shape}", "ranges")
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ValidationError("ranges must be finite and non-negative", "ranges")

    converged = True
    if method == "gauss_newton":
        x, converged = gauss_newton(A, r)
    elif method == "bancroft":
        x, converged = bancroft(A, r)
    elif method == "beck":
        x = beck(A, r)
    elif method == "cheung":
        x = cheung(A, r)
    elif method == "intersections":
        x = intersections(A, r)
    else:
        raise ValidationError(f"unknown method {method!r}; choose from {METHODS}", "positioning.methods")
    return PositionEstimate(np.asarray(x, dtype=float), method, range_residual_rms(x, A, r), bool(converged))
