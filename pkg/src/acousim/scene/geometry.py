"""2-D polygon primitives used by the room model."""

import numpy as np

EPS = 1e-12


def signed_area(vertices):
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, p, tol=EPS):
    return (
        min(a[0], b[0]) - tol <= p[0] <= max(a[0], b[0]) + tol
        and min(a[1], b[1]) - tol <= p[1] <= max(a[1], b[1]) + tol
    )


def segments_intersect(p1, p2, q1, q2, tol=EPS):
    """True if closed segments p1p2 and q1q2 share at least one point."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        return True
    if abs(d1) <= tol and _on_segment(q1, q2, p1, tol):
        return True
    if abs(d2) <= tol and _on_segment(q1, q2, p2, tol):
        return True
    if abs(d3) <= tol and _on_segment(p1, p2, q1, tol):
        return True
    if abs(d4) <= tol and _on_segment(p1, p2, q2, tol):
        return True
    return False


def is_simple_polygon(vertices):
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    if n < 3:
        return False
    if abs(signed_area(v)) <= EPS:
        return False
    for i in range(n):
        if np.allclose(v[i], v[(i + 1) % n], atol=EPS, rtol=0):
            return False
    for i in range(n):
        a1, a2 = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                # adjacent edges share one vertex; reject only collinear folds
                if (i + 1) % n == j:
                    shared, other_a, other_b = v[j], v[i], v[(j + 1) % n]
                else:
                    shared, other_a, other_b = v[i], v[(i + 1) % n], v[j]
                if abs(_orient(other_a, shared, other_b)) <= EPS:
                    da = other_a - shared
                    db = other_b - shared
                    if np.dot(da, db) > 0:
                        return False
                continue
            b1, b2 = v[j], v[(j + 1) % n]
            if segments_intersect(a1, a2, b1, b2):
                return False
    return True


def points_in_polygon(points, vertices):
    """Strict point-in-polygon by ray casting; boundary points are outside."""
    P = np.atleast_2d(np.asarray(points, dtype=float))[:, :2]
    v = np.asarray(vertices, dtype=float)
    a = v
    b = np.roll(v, -1, axis=0)
    px = P[:, 0][:, None]
    py = P[:, 1][:, None]
    ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]

    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    within = (
        (px >= np.minimum(ax, bx) - EPS)
        & (px <= np.maximum(ax, bx) + EPS)
        & (py >= np.minimum(ay, by) - EPS)
        & (py <= np.maximum(ay, by) + EPS)
    )
    on_edge = np.any((np.abs(cross) <= EPS * (1 + np.hypot(bx - ax, by - ay))) & within, axis=1)

    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
    crossings = np.sum(straddle & (px < x_cross), axis=1)
    return (crossings % 2 == 1) & ~on_edge


def distance_to_segments(points, vertices):
    """Distance from each 2-D point to the closest polygon edge."""
    P = np.atleast_2d(np.asarray(points, dtype=float))[:, :2]
    v = np.asarray(vertices, dtype=float)
    a = v[None, :, :]
    d = (np.roll(v, -1, axis=0) - v)[None, :, :]
    rel = P[:, None, :] - a
    t = np.clip(np.sum(rel * d, axis=2) / np.sum(d * d, axis=2), 0.0, 1.0)
    closest = a + t[..., None] * d
    return np.min(np.linalg.norm(P[:, None, :] - closest, axis=2), axis=1)


def segment_crosses_edges(p, q, vertices, skip=(), tol=1e-9):
    """True if the open segment pq properly crosses any polygon edge.

    Touching at the segment end points is allowed, which lets reflection paths
    start and end on the wall that generated them.
    """
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    p = np.asarray(p, dtype=float)[:2]
    q = np.asarray(q, dtype=float)[:2]
    d = q - p
    for i in range(n):
        if i in skip:
            continue
        a, b = v[i], v[(i + 1) % n]
        e = b - a
        denom = d[0] * e[1] - d[1] * e[0]
        if abs(denom) < 1e-15:
            continue
        w = a - p
        t = (w[0] * e[1] - w[1] * e[0]) / denom
        s = (w[0] * d[1] - w[1] * d[0]) / denom
        if tol < t < 1 - tol and -tol <= s <= 1 + tol:
            return True
    return False
