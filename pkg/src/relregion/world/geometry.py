"""Convex collision primitives.

Every test treats touching (zero separation) as a collision.  Polygons are
CCW vertex tuples; 3D obstacles are axis-aligned boxes given by min/max
corners.
"""
from __future__ import annotations

import math
from typing import Sequence, Tuple

Point2 = Tuple[float, float]
Polygon = Tuple[Point2, ...]


def polygon_area(poly: Sequence[Point2]) -> float:
    """Signed shoelace area, positive for CCW order."""
    a = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def is_convex_ccw(poly: Sequence[Point2]) -> bool:
    n = len(poly)
    if n < 3 or polygon_area(poly) <= 0.0:
        return False
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        cx, cy = poly[(i + 2) % n]
        if (bx - ax) * (cy - by) - (by - ay) * (cx - bx) < 0.0:
            return False
    return True


def box_polygon(lo: Sequence[float], hi: Sequence[float]) -> Polygon:
    return ((lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1]))


def transform_polygon(poly: Polygon, x: float, y: float, theta: float) -> Polygon:
    c, s = math.cos(theta), math.sin(theta)
    return tuple((x + c * px - s * py, y + s * px + c * py) for px, py in poly)


def point_in_polygon(px: float, py: float, poly: Polygon) -> bool:
    """Closed containment test for a convex CCW polygon."""
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        if (bx - ax) * (py - ay) - (by - ay) * (px - ax) < 0.0:
            return False
    return True


def point_segment_distance(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> float:
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    t = 0.0 if den == 0.0 else ((px - ax) * dx + (py - ay) * dy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(px - ax - t * dx, py - ay - t * dy)


def disc_hits_polygon(px: float, py: float, r: float, poly: Polygon) -> bool:
    if point_in_polygon(px, py, poly):
        return True
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        if point_segment_distance(px, py, ax, ay, bx, by) <= r:
            return True
    return False


def _axes(poly: Polygon):
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        yield (ay - by, bx - ax)


def _project(poly: Polygon, nx: float, ny: float) -> Tuple[float, float]:
    lo = hi = poly[0][0] * nx + poly[0][1] * ny
    for px, py in poly[1:]:
        p = px * nx + py * ny
        if p < lo:
            lo = p
        elif p > hi:
            hi = p
    return lo, hi


def polygons_intersect(a: Polygon, b: Polygon) -> bool:
    """Separating-axis test over the edge normals of both polygons."""
    for poly in (a, b):
        for nx, ny in _axes(poly):
            alo, ahi = _project(a, nx, ny)
            blo, bhi = _project(b, nx, ny)
            if ahi < blo or bhi < alo:
                return False
    return True


# -- 3D ---------------------------------------------------------------------

def point_in_aabb(p: Sequence[float], lo: Sequence[float], hi: Sequence[float]) -> bool:
    return all(l <= c <= h for c, l, h in zip(p, lo, hi))


def sphere_hits_aabb(p: Sequence[float], r: float, lo: Sequence[float], hi: Sequence[float]) -> bool:
    d2 = 0.0
    for c, l, h in zip(p, lo, hi):
        if c < l:
            d2 += (l - c) ** 2
        elif c > h:
            d2 += (c - h) ** 2
    return d2 <= r * r


def obb_hits_aabb(center: Sequence[float], rot, half: Sequence[float],
                  lo: Sequence[float], hi: Sequence[float]) -> bool:
    """Separating-axis test between an oriented box and an axis-aligned box.

    ``rot`` is a 3x3 rotation matrix (rows) whose columns are the oriented
    box axes in world coordinates.  Tests the 3 + 3 face normals and the 9
    edge cross products.
    """
    b_half = [(h - l) * 0.5 for l, h in zip(lo, hi)]
    t = [center[i] - (lo[i] + hi[i]) * 0.5 for i in range(3)]
    # R[i][j]: component i (world axis) of oriented box axis j.
    R = rot
    absR = [[abs(R[i][j]) + 1e-12 for j in range(3)] for i in range(3)]
    a = half
    # World axes.
    for i in range(3):
        ra = a[0] * absR[i][0] + a[1] * absR[i][1] + a[2] * absR[i][2]
        if abs(t[i]) > ra + b_half[i]:
            return False
    # Oriented box axes.
    for j in range(3):
        rb = b_half[0] * absR[0][j] + b_half[1] * absR[1][j] + b_half[2] * absR[2][j]
        tj = t[0] * R[0][j] + t[1] * R[1][j] + t[2] * R[2][j]
        if abs(tj) > a[j] + rb:
            return False
    # Cross products world_i x box_j.
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        for j in range(3):
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            # Axis L = e_i x A_j has components: L[i1] = -A_j[i2], L[i2] = A_j[i1].
            tl = t[i2] * R[i1][j] - t[i1] * R[i2][j]
            rw = b_half[i1] * absR[i2][j] + b_half[i2] * absR[i1][j]
            ro = a[j1] * absR[i][j2] + a[j2] * absR[i][j1]
            if abs(tl) > rw + ro:
                return False
    return True
