"""Convex polygon clipping, areas and centroids.

Two flavors: a plain Sutherland-Hodgman clip of one polygon against a
rectangle, and batched routines that work on whole grids of quadrilaterals
at once (shoelace moments, and moments of the part cut off by half-planes
through the origin).
"""
from __future__ import annotations

import numpy as np


def area_centroid(poly) -> tuple[float, tuple[float, float]]:
    """Signed-area-free shoelace area and centroid of a simple polygon.

    Empty or degenerate polygons give area 0 and the vertex mean as centroid.
    """
    p = np.asarray(poly, dtype=float).reshape(-1, 2)
    if len(p) == 0:
        return 0.0, (np.nan, np.nan)
    ref = p[0]
    x, y = p[:, 0] - ref[0], p[:, 1] - ref[1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a2 = cross.sum()
    if a2 == 0.0:
        c = p.mean(axis=0)
        return 0.0, (float(c[0]), float(c[1]))
    cx = ((x + xn) * cross).sum() / (3.0 * a2) + ref[0]
    cy = ((y + yn) * cross).sum() / (3.0 * a2) + ref[1]
    return abs(0.5 * a2), (float(cx), float(cy))


def _clip_one(points, inside, intersect):
    out = []
    n = len(points)
    for i in range(n):
        cur, nxt = points[i], points[(i + 1) % n]
        cin, nin = inside(cur), inside(nxt)
        if nin:
            if not cin:
                out.append(intersect(cur, nxt))
            out.append(nxt)
        elif cin:
            out.append(intersect(cur, nxt))
    return out


def clip_convex(poly, rect) -> np.ndarray:
    """Clip a convex polygon to the rectangle ``(x0, x1, y0, y1)``.

    Returns an ``(m, 2)`` vertex array; ``m == 0`` for an empty intersection.
    """
    x0, x1, y0, y1 = (float(v) for v in rect)
    pts = [tuple(v) for v in np.asarray(poly, dtype=float).reshape(-1, 2)]

    def cut_x(c):
        def f(p, q):
            t = (c - p[0]) / (q[0] - p[0])
            return (c, p[1] + t * (q[1] - p[1]))
        return f

    def cut_y(c):
        def f(p, q):
            t = (c - p[1]) / (q[1] - p[1])
            return (p[0] + t * (q[0] - p[0]), c)
        return f

    for inside, cut in ((lambda p: p[0] >= x0, cut_x(x0)),
                        (lambda p: p[0] <= x1, cut_x(x1)),
                        (lambda p: p[1] >= y0, cut_y(y0)),
                        (lambda p: p[1] <= y1, cut_y(y1))):
        if not pts:
            break
        pts = _clip_one(pts, inside, cut)
    return np.array(pts, dtype=float).reshape(-1, 2)


# Batched versions -----------------------------------------------------------

def polygon_area_centroid(px: np.ndarray, py: np.ndarray):
    """Batched shoelace area and centroid for polygons of shape ``(nv, ...)``.

    Coordinates are shifted to the first vertex before summing so tiny
    polygons far from the origin keep full relative precision.  Vertices
    must be counterclockwise; zero-area polygons get the vertex mean.
    """
    x0, y0 = px[0], py[0]
    x, y = px - x0, py - y0
    xn, yn = np.roll(x, -1, axis=0), np.roll(y, -1, axis=0)
    cross = x * yn - xn * y
    a2 = cross.sum(axis=0)
    ok = a2 > 0.0
    safe = np.where(ok, a2, 1.0)
    cx = np.where(ok, ((x + xn) * cross).sum(axis=0) / (3.0 * safe), x.mean(axis=0)) + x0
    cy = np.where(ok, ((y + yn) * cross).sum(axis=0) / (3.0 * safe), y.mean(axis=0)) + y0
    return 0.5 * a2, cx, cy


def clip_moments(px: np.ndarray, py: np.ndarray, planes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Area and centroid of batched convex polygons cut by half-planes through the origin.

    ``planes`` lists ``(a, b)`` pairs meaning ``a*x + b*y <= 0``.  Every cut
    line passes through the origin, where the shoelace terms ``x dy - y dx``,
    ``x^2 dy`` and ``y^2 dx`` all vanish, so only the polygon edges need
    clipping (Liang-Barsky); the pieces of the cut lines contribute nothing.
    Empty pieces get area zero and centroid at the origin.
    """
    dx = np.roll(px, -1, axis=0) - px
    dy = np.roll(py, -1, axis=0) - py
    t0 = np.zeros(px.shape)
    t1 = np.ones(px.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        for a, b in planes:
            sp = a * px + b * py
            ds = a * dx + b * dy
            t = -sp / ds
            np.minimum(t1, np.where(ds > 0.0, t, np.inf), out=t1)
            np.maximum(t0, np.where(ds < 0.0, t, -np.inf), out=t0)
            t1[(ds == 0.0) & (sp > 0.0)] = -1.0
    keep = t1 > t0
    ax, ay = px + t0 * dx, py + t0 * dy
    bx, by = px + t1 * dx, py + t1 * dy
    cross = np.where(keep, ax * by - bx * ay, 0.0)
    a2 = cross.sum(axis=0)
    ok = a2 > 0.0
    safe = np.where(ok, a2, 1.0)
    cx = np.where(ok, ((ax + bx) * cross).sum(axis=0) / (3.0 * safe), 0.0)
    cy = np.where(ok, ((ay + by) * cross).sum(axis=0) / (3.0 * safe), 0.0)
    return 0.5 * a2, cx, cy
