"""Loss terms: weighted MSE, the Xing self-intersection penalty, and weight maps."""
from __future__ import annotations

import numpy as np

from .errors import InputError

WEIGHT_FLOOR = 0.1
_NORM_EPS = 1e-9
_PARALLEL_EPS = 1e-12


def uniform_weights(height: int, width: int) -> np.ndarray:
    return np.ones((height, width), dtype=np.float64)


def _check_pair(a, b, w=None):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"image shapes differ: {a.shape} vs {b.shape}")
    if w is not None:
        w = np.asarray(w, dtype=np.float64)
        if w.shape != a.shape[:2]:
            raise InputError(f"weight map {w.shape} does not match image {a.shape[:2]}")
    return a, b, w


def weighted_mse(a, b, w=None) -> float:
    """Mean over pixels and channels of ``w * (a - b)**2``; ``w`` is per pixel."""
    a, b, w = _check_pair(a, b, w)
    sq = (a - b) ** 2
    if w is not None:
        sq = sq * w[:, :, None]
    return float(sq.mean())


def weighted_mse_grad(a, b, w=None) -> np.ndarray:
    """Gradient of :func:`weighted_mse` with respect to ``a``."""
    a, b, w = _check_pair(a, b, w)
    g = (2.0 / a.size) * (a - b)
    if w is not None:
        g = g * w[:, :, None]
    return g


def _xing_terms(path):
    segs = path.segment_arrays()
    e1 = segs[:, 1] - segs[:, 0]
    e2 = segs[:, 2] - segs[:, 1]
    e3 = segs[:, 3] - segs[:, 2]
    cross12 = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    cross13 = e1[:, 0] * e3[:, 1] - e1[:, 1] * e3[:, 0]
    n1 = np.linalg.norm(e1, axis=1)
    n3 = np.linalg.norm(e3, axis=1)
    ok = (n1 >= _NORM_EPS) & (n3 >= _NORM_EPS)
    d1 = 0.5 * (1.0 + np.sign(cross12))
    d2 = np.zeros_like(cross13)
    d2[ok] = cross13[ok] / (n1[ok] * n3[ok])
    # antiparallel handles (half-ellipse arcs) should score exactly zero
    d2[np.abs(d2) < _PARALLEL_EPS] = 0.0
    return e1, e3, cross13, n1, n3, ok, d1, d2


def xing_loss(path) -> float:
    """Self-intersection penalty summed over the path's cubic segments.

    For control edges ``e1 = P1-P0``, ``e2 = P2-P1``, ``e3 = P3-P2`` a segment
    scores ``D1*max(0, -D2) + (1-D1)*max(0, D2)`` with
    ``D1 = (1 + sign(e1 x e2)) / 2`` and ``D2 = (e1 x e3) / (|e1| |e3|)``.
    """
    _, _, _, _, _, _, d1, d2 = _xing_terms(path)
    return float(np.sum(d1 * np.maximum(0.0, -d2) + (1.0 - d1) * np.maximum(0.0, d2)))


def xing_loss_grad(path) -> np.ndarray:
    """Gradient of :func:`xing_loss` with respect to ``path.points``, shape ``(3k, 2)``."""
    e1, e3, c, n1, n3, ok, d1, d2 = _xing_terms(path)
    k = path.num_segments
    dpen = np.where(d2 < 0, -d1, 0.0) + np.where(d2 > 0, 1.0 - d1, 0.0)
    dpen = np.where(ok, dpen, 0.0)
    denom = np.where(ok, n1 * n3, 1.0)
    n1s = np.where(ok, n1, 1.0)
    n3s = np.where(ok, n3, 1.0)
    dc_de1 = np.column_stack([e3[:, 1], -e3[:, 0]])
    dc_de3 = np.column_stack([-e1[:, 1], e1[:, 0]])
    g1 = dpen[:, None] * (dc_de1 / denom[:, None] - (c / (n1s**3 * n3s))[:, None] * e1)
    g3 = dpen[:, None] * (dc_de3 / denom[:, None] - (c / (n1s * n3s**3))[:, None] * e3)
    grad = np.zeros_like(path.points)
    i0 = 3 * np.arange(k)
    np.add.at(grad, i0, -g1)
    np.add.at(grad, i0 + 1, g1)
    np.add.at(grad, i0 + 2, -g3)
    np.add.at(grad, (i0 + 3) % (3 * k), g3)
    return grad


def update_weight_map(rendered, target) -> np.ndarray:
    """Per-pixel MSE weights proportional to the current squared residual.

    Returns ``max(0.1, c * r)`` where ``r`` is the channel-mean squared residual
    and ``c`` is solved so the map has mean 1. Flooring first and rescaling
    afterwards would push floored pixels below 0.1, hence the exact solve.
    A (near) perfect fit gives a uniform map.
    """
    rendered, target, _ = _check_pair(rendered, target)
    raw = ((rendered - target) ** 2).mean(axis=2)
    if raw.mean() <= 1e-12:
        return np.ones(raw.shape)
    r = np.sort(raw.ravel())
    n = r.size
    suffix = np.concatenate([np.cumsum(r[::-1])[::-1], [0.0]])
    # j = number of floored pixels; scale solving mean(max(floor, c*r)) = 1
    j = np.arange(n)
    with np.errstate(divide="ignore"):
        c = (n - WEIGHT_FLOOR * j) / suffix[:-1]
    lower_ok = (j == 0) | (c * r[np.maximum(j - 1, 0)] <= WEIGHT_FLOOR)
    upper_ok = c * r >= WEIGHT_FLOOR
    scale = c[np.flatnonzero(lower_ok & upper_ok)[0]]
    return np.maximum(WEIGHT_FLOOR, scale * raw)
