"""Closed cubic Bezier paths: evaluation, initialization, subdivision, distance.

A closed path with ``k`` segments stores ``3k`` control points. Segment ``i``
uses points ``3i, 3i+1, 3i+2`` and ``3(i+1) mod 3k``, so the end point of each
segment *is* the start point of the next one and closure cannot be broken.
Coordinates are continuous pixel units; pixel ``(x, y)`` covers
``[x, x+1) x [y, y+1)`` and its centre is ``(x + 0.5, y + 0.5)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InputError


@dataclass
class CubicSegment:
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2, self.p3], dtype=np.float64)


@dataclass
class ClosedBezierPath:
    points: np.ndarray  # (3k, 2)
    fill_color: np.ndarray  # (3,)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        self.fill_color = np.asarray(self.fill_color, dtype=np.float64).reshape(3)
        if len(self.points) % 3 or len(self.points) < 6:
            raise InputError("a closed path needs 3k control points with k >= 2")
        if not np.all(np.isfinite(self.points)):
            raise InputError("control points must be finite")

    @classmethod
    def from_segments(cls, segments, fill_color) -> "ClosedBezierPath":
        """Build from explicit ``(k, 4, 2)`` segment control points.

        Each segment's last point must equal the next segment's first.
        """
        segs = np.asarray(
            [s.as_array() if isinstance(s, CubicSegment) else s for s in segments],
            dtype=np.float64,
        )
        k = len(segs)
        for i in range(k):
            if not np.array_equal(segs[i, 3], segs[(i + 1) % k, 0]):
                raise InputError(f"segment {i} does not end where segment {(i + 1) % k} starts")
        return cls(segs[:, :3].reshape(-1, 2).copy(), fill_color)

    @property
    def num_segments(self) -> int:
        return len(self.points) // 3

    def segment_indices(self, i: int) -> tuple[int, int, int, int]:
        n = len(self.points)
        return 3 * i, 3 * i + 1, 3 * i + 2, (3 * i + 3) % n

    def segment_array(self, i: int) -> np.ndarray:
        return self.points[list(self.segment_indices(i))]

    def segment(self, i: int) -> CubicSegment:
        return CubicSegment(*self.segment_array(i))

    @property
    def segments(self) -> list[CubicSegment]:
        return [self.segment(i) for i in range(self.num_segments)]

    def segment_arrays(self) -> np.ndarray:
        """All segments as a ``(k, 4, 2)`` array."""
        idx = np.arange(self.num_segments)[:, None] * 3 + np.arange(4)[None, :]
        return self.points[idx % len(self.points)]

    def copy(self) -> "ClosedBezierPath":
        return ClosedBezierPath(self.points.copy(), self.fill_color.copy())


@dataclass
class VectorScene:
    background_color: np.ndarray
    paths: list[ClosedBezierPath] = field(default_factory=list)

    def __post_init__(self):
        self.background_color = np.asarray(self.background_color, dtype=np.float64).reshape(3)

    def copy(self) -> "VectorScene":
        return VectorScene(self.background_color.copy(), [p.copy() for p in self.paths])


def bernstein(t) -> np.ndarray:
    """Cubic Bernstein weights, shape ``(..., 4)``."""
    t = np.asarray(t, dtype=np.float64)
    u = 1.0 - t
    return np.stack([u * u * u, 3.0 * t * u * u, 3.0 * t * t * u, t * t * t], axis=-1)


def eval_cubic(segment, t: float) -> np.ndarray:
    if not 0.0 <= t <= 1.0:
        raise InputError(f"t must lie in [0, 1], got {t}")
    ctrl = segment.as_array() if isinstance(segment, CubicSegment) else np.asarray(segment, float)
    return bernstein(t) @ ctrl


def split_cubic(ctrl: np.ndarray, t: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """De Casteljau subdivision of a ``(4, 2)`` cubic into two cubics."""
    p0, p1, p2, p3 = ctrl
    a = p0 + t * (p1 - p0)
    b = p1 + t * (p2 - p1)
    c = p2 + t * (p3 - p2)
    d = a + t * (b - a)
    e = b + t * (c - b)
    m = d + t * (e - d)
    return np.array([p0, a, d, m]), np.array([m, e, c, p3])


def ellipse_path(center, semi_axes, axes, k: int, fill_color) -> ClosedBezierPath:
    """``k`` cubic arcs approximating an ellipse.

    ``axes`` holds the two unit axis directions as rows. The arcs are the affine
    image of the usual circle approximation with handle length
    ``4/3 * tan(dtheta / 4)``.
    """
    if k < 2:
        raise InputError("a closed path needs at least 2 segments")
    center = np.asarray(center, dtype=np.float64)
    a, b = semi_axes
    u, v = np.asarray(axes, dtype=np.float64)
    dtheta = 2.0 * math.pi / k
    h = 4.0 / 3.0 * math.tan(dtheta / 4.0)
    pts = []
    for i in range(k):
        th0, th1 = i * dtheta, (i + 1) * dtheta
        on0 = center + a * math.cos(th0) * u + b * math.sin(th0) * v
        on1 = center + a * math.cos(th1) * u + b * math.sin(th1) * v
        d0 = -a * math.sin(th0) * u + b * math.cos(th0) * v
        d1 = -a * math.sin(th1) * u + b * math.cos(th1) * v
        pts.extend([on0, on0 + h * d0, on1 - h * d1])
    return ClosedBezierPath(np.array(pts), fill_color)


def mask_ellipse(mask: np.ndarray) -> tuple[np.ndarray, tuple[float, float], np.ndarray]:
    """Centroid, semi-axes and axis directions of a pixel mask.

    Pixels count as unit squares, so each axis variance gets the ``1/12`` of a
    uniform unit interval. A uniform ellipse with semi-axis ``a`` has variance
    ``a**2 / 4`` along that axis.
    """
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        raise InputError("cannot fit an ellipse to an empty mask")
    pts = np.column_stack([xs + 0.5, ys + 0.5])
    center = pts.mean(axis=0)
    d = pts - center
    cov = d.T @ d / len(pts) + np.eye(2) / 12.0
    evals, evecs = np.linalg.eigh(cov)
    order = [1, 0]  # major axis first
    semi = tuple(max(1.0, 2.0 * math.sqrt(max(evals[i], 0.0))) for i in order)
    axes = evecs[:, order].T
    return center, semi, axes


def init_path_for_component(component, k: int = 4) -> ClosedBezierPath:
    """Moment-fitted ellipse over the component mask, filled with its mean colour."""
    if k < 2:
        raise InputError("k must be at least 2")
    center, semi, axes = mask_ellipse(component.mask)
    return ellipse_path(center, semi, axes, k, component.mean_color)


def refine_path(path: ClosedBezierPath) -> ClosedBezierPath:
    """Split the longest segment (by chord) at its midpoint; geometry is unchanged."""
    segs = path.segment_arrays()
    chords = np.linalg.norm(segs[:, 3] - segs[:, 0], axis=1)
    i = int(np.argmax(chords))  # first maximum on ties
    left, right = split_cubic(segs[i], 0.5)
    pts = path.points
    new_pts = np.concatenate(
        [pts[: 3 * i + 1], left[1:3], right[0:3], pts[3 * i + 3 :]], axis=0
    )
    return ClosedBezierPath(new_pts, path.fill_color.copy())


def flatten_weights(k: int, n: int) -> np.ndarray:
    """Dense ``(k*n, 3k)`` map from control points to polyline vertices.

    Vertex ``i*n + m`` sits at ``t = m/n`` on segment ``i``.
    """
    if n < 2:
        raise InputError("need at least 2 samples per segment")
    basis = bernstein(np.arange(n) / n)  # (n, 4); row 0 is exactly [1, 0, 0, 0]
    W = np.zeros((k * n, 3 * k))
    for i in range(k):
        cols = [3 * i, 3 * i + 1, 3 * i + 2, (3 * i + 3) % (3 * k)]
        W[i * n : (i + 1) * n][:, cols] += basis
    return W


def flatten_path(path: ClosedBezierPath, samples_per_segment: int = 16) -> np.ndarray:
    """Closed polyline of ``k * n`` vertices (the last connects back to the first)."""
    n = samples_per_segment
    if n < 2:
        raise InputError("need at least 2 samples per segment")
    k = path.num_segments
    basis = bernstein(np.arange(n) / n)[:, 1:]
    segs = path.segment_arrays()  # (k, 4, 2)
    # offsets from the anchor: anchors and fully collapsed segments come out exact
    rel = segs[:, 1:] - segs[:, :1]
    verts = segs[:, :1] + np.einsum("mj,kjd->kmd", basis, rel)
    return verts.reshape(k * n, 2)


@numba.njit(cache=True)
def _distance_field(poly, xs, ys, dist, param, edge, inside):
    m = poly.shape[0]
    for p in range(xs.shape[0]):
        qx = xs[p]
        qy = ys[p]
        best = np.inf
        best_s = 0.0
        best_e = 0
        odd = False
        for e in range(m):
            ax = poly[e, 0]
            ay = poly[e, 1]
            bx = poly[(e + 1) % m, 0]
            by = poly[(e + 1) % m, 1]
            ex = bx - ax
            ey = by - ay
            ll = ex * ex + ey * ey
            if ll > 0.0:
                s = ((qx - ax) * ex + (qy - ay) * ey) / ll
                if s < 0.0:
                    s = 0.0
                elif s > 1.0:
                    s = 1.0
            else:
                s = 0.0
            cx = ax + s * ex - qx
            cy = ay + s * ey - qy
            d2 = cx * cx + cy * cy
            if d2 < best:
                best = d2
                best_s = s
                best_e = e
            if (ay > qy) != (by > qy):
                xcross = ax + (qy - ay) * ex / ey
                if qx < xcross:
                    odd = not odd
        dist[p] = np.sqrt(best)
        param[p] = best_s
        edge[p] = best_e
        inside[p] = odd


def polyline_distance(poly: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    """Unsigned distance to a closed polyline plus the even-odd inside flag.

    Returns ``(dist, s, edge, inside)`` where ``edge`` is the index of the
    nearest polyline edge (lowest index on ties) and ``s`` the clamped
    parameter of the closest point on it.
    """
    poly = np.ascontiguousarray(poly, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64).ravel()
    ys = np.ascontiguousarray(ys, dtype=np.float64).ravel()
    n = xs.shape[0]
    dist = np.empty(n)
    param = np.empty(n)
    edge = np.empty(n, dtype=np.int64)
    inside = np.empty(n, dtype=np.bool_)
    _distance_field(poly, xs, ys, dist, param, edge, inside)
    return dist, param, edge, inside


def signed_distance(path: ClosedBezierPath, point, samples_per_segment: int = 16) -> float:
    """Distance to the flattened outline; negative inside (even-odd), positive outside."""
    if samples_per_segment < 8:
        raise InputError("signed distance needs at least 8 samples per segment")
    poly = flatten_path(path, samples_per_segment)
    point = np.asarray(point, dtype=np.float64)
    dist, _, _, inside = polyline_distance(poly, point[:1], point[1:2])
    return float(-dist[0] if inside[0] else dist[0])
