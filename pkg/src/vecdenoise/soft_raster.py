"""Soft rasterization of a :class:`VectorScene` and its exact gradients.

Coverage of a path at pixel centre ``q`` is ``sigmoid(-sd(q) / gamma)`` where
``sd`` is the signed distance to the flattened outline (negative inside).
Paths are composited over the background in list order:
``C <- alpha * colour + (1 - alpha) * C``.

A path whose outline collapses to a single point is not drawn at all.
Coverage is evaluated only inside the outline's bounding box grown by
``cutoff * gamma`` pixels; beyond that the sigmoid is below ``exp(-cutoff)``
and is taken as exactly 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InputError
from .losses import weighted_mse, weighted_mse_grad, xing_loss, xing_loss_grad
from .vector_paths import VectorScene, flatten_path, flatten_weights, polyline_distance

DEFAULT_SAMPLES = 16
DEFAULT_CUTOFF = 30.0


@dataclass
class SceneGradients:
    points: list[np.ndarray]  # per path, (3k, 2)
    colors: list[np.ndarray]  # per path, (3,)
    background: np.ndarray  # (3,)

    def flat(self) -> np.ndarray:
        parts = [p.ravel() for p in self.points] + list(self.colors) + [self.background]
        return np.concatenate(parts) if parts else np.zeros(0)


@dataclass
class _Coverage:
    window: tuple[slice, slice]
    alpha: np.ndarray  # (h, w) inside the window
    poly: np.ndarray
    dist: np.ndarray
    param: np.ndarray
    edge: np.ndarray
    sign: np.ndarray
    qx: np.ndarray
    qy: np.ndarray


def _coverage(path, width, height, gamma, samples, cutoff) -> _Coverage | None:
    poly = flatten_path(path, samples)
    if np.all(poly == poly[0]):
        # collapsed to a point: encloses nothing, so it is not drawn
        return None
    margin = cutoff * gamma
    lo = poly.min(axis=0) - margin
    hi = poly.max(axis=0) + margin
    # pixel x has its centre at x + 0.5
    x0 = max(0, int(np.floor(lo[0] - 0.5)))
    x1 = min(width, int(np.ceil(hi[0] - 0.5)) + 1)
    y0 = max(0, int(np.floor(lo[1] - 0.5)))
    y1 = min(height, int(np.ceil(hi[1] - 0.5)) + 1)
    if x0 >= x1 or y0 >= y1:
        return None
    qy, qx = np.mgrid[y0:y1, x0:x1].astype(np.float64) + 0.5
    dist, param, edge, inside = polyline_distance(poly, qx, qy)
    shape = qx.shape
    sign = np.where(inside, -1.0, 1.0).reshape(shape)
    alpha = expit(-(sign * dist.reshape(shape)) / gamma)
    return _Coverage(
        (slice(y0, y1), slice(x0, x1)),
        alpha,
        poly,
        dist,
        param,
        edge,
        sign,
        qx.ravel(),
        qy.ravel(),
    )


def coverage_map(path, width, height, gamma=1.0, samples=DEFAULT_SAMPLES, cutoff=DEFAULT_CUTOFF):
    """Full-frame coverage ``alpha`` of one path."""
    if not gamma > 0:
        raise InputError("gamma must be positive")
    out = np.zeros((height, width))
    cov = _coverage(path, width, height, gamma, samples, cutoff)
    if cov is not None:
        out[cov.window] = cov.alpha
    return out


def _forward(scene: VectorScene, width, height, gamma, samples, cutoff):
    if not gamma > 0:
        raise InputError("gamma must be positive")
    canvas = np.empty((height, width, 3))
    canvas[...] = scene.background_color
    below = []
    covs = []
    for path in scene.paths:
        cov = _coverage(path, width, height, gamma, samples, cutoff)
        covs.append(cov)
        if cov is None:
            below.append(None)
            continue
        win = canvas[cov.window]
        below.append(win.copy())
        a = cov.alpha[:, :, None]
        canvas[cov.window] = a * path.fill_color + (1.0 - a) * win
    return canvas, covs, below


def render_scene(
    scene: VectorScene,
    width: int,
    height: int,
    gamma: float = 1.0,
    samples: int = DEFAULT_SAMPLES,
    cutoff: float = DEFAULT_CUTOFF,
) -> np.ndarray:
    canvas, _, _ = _forward(scene, width, height, gamma, samples, cutoff)
    return canvas


def _check_target(target, weights):
    target = np.asarray(target, dtype=np.float64)
    if target.ndim != 3 or target.shape[2] != 3:
        raise InputError("target must be an (H, W, 3) image")
    if weights is not None and np.shape(weights) != target.shape[:2]:
        raise InputError("weight map does not match target")
    return target


def scene_xing(scene: VectorScene) -> float:
    return float(sum(xing_loss(p) for p in scene.paths))


def render_with_loss(
    scene,
    target,
    weights=None,
    lam: float = 0.0,
    gamma: float = 1.0,
    samples: int = DEFAULT_SAMPLES,
    cutoff: float = DEFAULT_CUTOFF,
):
    """Render and return ``(image, weighted_mse + lam * sum of Xing penalties)``."""
    target = _check_target(target, weights)
    h, w = target.shape[:2]
    img = render_scene(scene, w, h, gamma, samples, cutoff)
    loss = weighted_mse(img, target, weights)
    if lam:
        loss += lam * scene_xing(scene)
    return img, loss


def loss_and_gradients(
    scene,
    target,
    weights=None,
    lam: float = 0.0,
    gamma: float = 1.0,
    samples: int = DEFAULT_SAMPLES,
    cutoff: float = DEFAULT_CUTOFF,
):
    """One forward/backward pass.

    Returns ``(image, total_loss, mse, xing, SceneGradients)``.
    """
    target = _check_target(target, weights)
    h, w = target.shape[:2]
    img, covs, below = _forward(scene, w, h, gamma, samples, cutoff)
    mse = weighted_mse(img, target, weights)
    xing = scene_xing(scene) if lam else 0.0
    grad_c = weighted_mse_grad(img, target, weights)

    n_paths = len(scene.paths)
    g_points = [None] * n_paths
    g_colors = [None] * n_paths
    for p in range(n_paths - 1, -1, -1):
        path = scene.paths[p]
        cov = covs[p]
        g_pts = lam * xing_loss_grad(path) if lam else np.zeros_like(path.points)
        if cov is None:
            g_points[p] = g_pts
            g_colors[p] = np.zeros(3)
            continue
        a = cov.alpha
        gwin = grad_c[cov.window]
        g_colors[p] = np.einsum("ij,ijc->c", a, gwin)
        g_alpha = np.einsum("ijc,ijc->ij", gwin, path.fill_color - below[p])
        grad_c[cov.window] = gwin * (1.0 - a)[:, :, None]
        # d alpha / d sd = -alpha (1 - alpha) / gamma ; d sd / d dist = sign
        g_dist = (g_alpha * (-a * (1.0 - a) / gamma) * cov.sign).ravel()
        g_pts += _distance_backward(cov, g_dist, path.num_segments, samples)
        g_points[p] = g_pts
    g_bg = grad_c.sum(axis=(0, 1))
    grads = SceneGradients(g_points, g_colors, g_bg)
    return img, mse + lam * xing, mse, xing, grads


def _distance_backward(cov: _Coverage, g_dist, k, samples) -> np.ndarray:
    poly = cov.poly
    m = len(poly)
    e = cov.edge
    s = cov.param
    a = poly[e]
    b = poly[(e + 1) % m]
    cx = a[:, 0] + s * (b[:, 0] - a[:, 0]) - cov.qx
    cy = a[:, 1] + s * (b[:, 1] - a[:, 1]) - cov.qy
    d = cov.dist
    safe = d > 0.0
    inv = np.where(safe, 1.0 / np.where(safe, d, 1.0), 0.0)
    gx = g_dist * cx * inv
    gy = g_dist * cy * inv
    # nearest point c = (1 - s) a + s b; the s-dependence drops out at the optimum
    eb = (e + 1) % m
    dvx = np.bincount(e, gx * (1.0 - s), m) + np.bincount(eb, gx * s, m)
    dvy = np.bincount(e, gy * (1.0 - s), m) + np.bincount(eb, gy * s, m)
    W = flatten_weights(k, samples)
    return W.T @ np.column_stack([dvx, dvy])


def scene_gradients(
    scene,
    target,
    weights=None,
    lam: float = 0.0,
    gamma: float = 1.0,
    samples: int = DEFAULT_SAMPLES,
    cutoff: float = DEFAULT_CUTOFF,
) -> SceneGradients:
    return loss_and_gradients(scene, target, weights, lam, gamma, samples, cutoff)[4]
