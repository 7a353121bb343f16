"""Planar geometry: polylines, oriented boxes and box-to-box distances."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod can return 2*pi - tiny which rounds to 2*pi after the add
    if a >= TWO_PI:
        a = 0.0
    return a


def angle_diff(a: float, b: float) -> float:
    """Signed smallest difference a - b in (-pi, pi]."""
    d = math.fmod(a - b, TWO_PI)
    if d > math.pi:
        d -= TWO_PI
    elif d <= -math.pi:
        d += TWO_PI
    return d


class Polyline:
    """Piecewise-linear curve with arc-length parameterization."""

    def __init__(self, points: Sequence[Sequence[float]]):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("polyline needs at least two 2D points")
        seg = np.diff(pts, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(seg_len <= 0.0):
            raise ValueError("polyline has repeated consecutive points")
        self.points = pts
        self._seg = seg
        self._seg_len = seg_len
        self._cum = np.concatenate([[0.0], np.cumsum(seg_len)])

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    def project(self, p: Sequence[float]) -> tuple[float, float]:
        """Return (arc length s, signed lateral offset d) of the closest point.

        Positive d is to the left of the direction of travel. Points beyond
        either end are projected onto the extension of the end segment, so s
        may be negative or exceed the length.
        """
        px, py = float(p[0]), float(p[1])
        a = self.points[:-1]
        t = ((px - a[:, 0]) * self._seg[:, 0] + (py - a[:, 1]) * self._seg[:, 1]) / self._seg_len**2
        tin = np.clip(t, 0.0, 1.0)
        dx = px - (a[:, 0] + tin * self._seg[:, 0])
        dy = py - (a[:, 1] + tin * self._seg[:, 1])
        i = int(np.argmin(dx**2 + dy**2))
        n = len(t)
        # beyond either end, extend the end segment
        if (i == 0 and t[0] < 0.0) or (i == n - 1 and t[-1] > 1.0):
            use_t = t[i]
        else:
            use_t = tin[i]
        s = self._cum[i] + use_t * self._seg_len[i]
        ux, uy = self._seg[i] / self._seg_len[i]
        qx = a[i, 0] + use_t * self._seg[i, 0]
        qy = a[i, 1] + use_t * self._seg[i, 1]
        d = ux * (py - qy) - uy * (px - qx)
        return float(s), float(d)

    def _locate(self, s: float) -> tuple[int, float]:
        i = int(np.searchsorted(self._cum, s, side="right") - 1)
        i = min(max(i, 0), len(self._seg_len) - 1)
        return i, (s - self._cum[i]) / self._seg_len[i]

    def point_at(self, s: float, d: float = 0.0) -> tuple[float, float]:
        """Point at arc length s, shifted d to the left. Extrapolates past the ends."""
        i, t = self._locate(s)
        ux, uy = self._seg[i] / self._seg_len[i]
        x = self.points[i, 0] + t * self._seg[i, 0] - uy * d
        y = self.points[i, 1] + t * self._seg[i, 1] + ux * d
        return float(x), float(y)

    def heading_at(self, s: float) -> float:
        i, _ = self._locate(s)
        return wrap_angle(math.atan2(self._seg[i, 1], self._seg[i, 0]))


def box_corners(x: float, y: float, heading: float, length: float, width: float) -> np.ndarray:
    """Corners of an oriented rectangle, counter-clockwise, shape (4, 2)."""
    c, s = math.cos(heading), math.sin(heading)
    hl, hw = 0.5 * length, 0.5 * width
    local = np.array([[hl, -hw], [hl, hw], [-hl, hw], [-hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([x, y])


def _axes(poly: np.ndarray) -> np.ndarray:
    edges = np.roll(poly, -1, axis=0) - poly
    normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1)
    return normals / np.linalg.norm(normals, axis=1, keepdims=True)


def convex_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    """Separating-axis test for two convex polygons (touching counts as overlap)."""
    for axis in np.vstack([_axes(a), _axes(b)]):
        pa = a @ axis
        pb = b @ axis
        if pa.max() < pb.min() or pb.max() < pa.min():
            return False
    return True


def _point_segment_dist(p: np.ndarray, s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    """Distances from each point in p (k,2) to each segment s0[i]-s1[i]; shape (k, n)."""
    seg = s1 - s0
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    rel = p[:, None, :] - s0[None, :, :]
    t = np.clip(np.einsum("kij,ij->ki", rel, seg) / seg_len2, 0.0, 1.0)
    closest = s0[None, :, :] + t[:, :, None] * seg[None, :, :]
    return np.linalg.norm(p[:, None, :] - closest, axis=2)


def convex_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Minimum Euclidean distance between two convex polygons; 0 if they overlap."""
    if convex_overlap(a, b):
        return 0.0
    # disjoint convex polygons: the closest pair always involves a vertex
    d1 = _point_segment_dist(a, b, np.roll(b, -1, axis=0)).min()
    d2 = _point_segment_dist(b, a, np.roll(a, -1, axis=0)).min()
    return float(min(d1, d2))


def clip_convex(subject: np.ndarray, clipper: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by a counter-clockwise convex clipper."""
    out = [tuple(p) for p in subject]
    n = len(clipper)
    for i in range(n):
        if not out:
            break
        e0, e1 = clipper[i], clipper[(i + 1) % n]
        ex, ey = e1 - e0

        def inside(p):
            return ex * (p[1] - e0[1]) - ey * (p[0] - e0[0]) >= 0.0

        def cross_point(p, q):
            px, py = p
            qx, qy = q
            dx, dy = qx - px, qy - py
            den = ex * dy - ey * dx
            if den == 0.0:
                return p
            t = (ey * (px - e0[0]) - ex * (py - e0[1])) / den
            return (px + t * dx, py + t * dy)

        inp = out
        out = []
        prev = inp[-1]
        for cur in inp:
            if inside(cur):
                if not inside(prev):
                    out.append(cross_point(prev, cur))
                out.append(cur)
            elif inside(prev):
                out.append(cross_point(prev, cur))
            prev = cur
    return np.array(out, dtype=float).reshape(-1, 2)


def contact_point(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Representative contact location between two convex polygons.

    Centroid of the overlap region when they intersect, otherwise the midpoint
    of the closest vertex-to-edge pair.
    """
    inter = clip_convex(a, b)
    if len(inter) >= 1:
        return inter.mean(axis=0)
    best = None
    for p_set, q_poly in ((a, b), (b, a)):
        q1 = np.roll(q_poly, -1, axis=0)
        for p in p_set:
            seg = q1 - q_poly
            t = np.clip(np.einsum("ij,ij->i", p - q_poly, seg) / np.einsum("ij,ij->i", seg, seg), 0, 1)
            cl = q_poly + t[:, None] * seg
            d = np.linalg.norm(cl - p, axis=1)
            k = int(np.argmin(d))
            if best is None or d[k] < best[0]:
                best = (d[k], 0.5 * (p + cl[k]))
    return best[1]
