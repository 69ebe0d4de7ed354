"""Adam-driven fitting of a vector scene to one target image."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .soft_raster import DEFAULT_CUTOFF, DEFAULT_SAMPLES, loss_and_gradients, render_with_loss
from .vector_paths import VectorScene


@dataclass
class OptimConfig:
    alpha: float = 0.3  # control-point learning rate, pixels
    beta: float = 0.01  # colour learning rate
    lam: float = 0.01  # Xing penalty weight
    t_max: int = 300
    gamma: float = 1.0  # rasterizer softness, pixels
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    samples_per_segment: int = DEFAULT_SAMPLES

    def validate(self) -> "OptimConfig":
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("learning rates must be non-negative")
        if self.lam < 0:
            raise ConfigError("lambda must be non-negative")
        if self.t_max < 0:
            raise ConfigError("t_max must be non-negative")
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ConfigError("Adam betas must lie in [0, 1)")
        if self.samples_per_segment < 8:
            raise ConfigError("samples_per_segment must be at least 8")
        return self


class Adam:
    """Adam with bias correction over a flat parameter vector.

    ``lr`` may be a scalar or an array matching the parameters, which is how
    points and colours get their separate rates.
    """

    def __init__(self, size, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr = lr
        self.b1 = b1
        self.b2 = b2
        self.eps = eps
        self.t = 0
        self.m = np.zeros(size)
        self.v = np.zeros(size)

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * grad
        self.v = self.b2 * self.v + (1 - self.b2) * grad * grad
        m_hat = self.m / (1 - self.b1**self.t)
        v_hat = self.v / (1 - self.b2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _pack(scene: VectorScene, frozen) -> tuple[np.ndarray, np.ndarray]:
    """Flatten trainable parameters; returns values and a point/colour flag."""
    vals, is_point = [], []
    for path, fz in zip(scene.paths, frozen):
        if fz:
            continue
        vals.append(path.points.ravel())
        is_point.append(np.ones(path.points.size, bool))
    for path, fz in zip(scene.paths, frozen):
        if fz:
            continue
        vals.append(path.fill_color)
        is_point.append(np.zeros(3, bool))
    vals.append(scene.background_color)
    is_point.append(np.zeros(3, bool))
    return np.concatenate(vals), np.concatenate(is_point)


def _unpack(scene: VectorScene, frozen, flat: np.ndarray) -> None:
    i = 0
    for path, fz in zip(scene.paths, frozen):
        if fz:
            continue
        n = path.points.size
        path.points[...] = flat[i : i + n].reshape(-1, 2)
        i += n
    for path, fz in zip(scene.paths, frozen):
        if fz:
            continue
        path.fill_color[...] = np.clip(flat[i : i + 3], 0.0, 1.0)
        i += 3
    scene.background_color[...] = np.clip(flat[i : i + 3], 0.0, 1.0)


def _pack_grads(grads, frozen) -> np.ndarray:
    parts = [g.ravel() for g, fz in zip(grads.points, frozen) if not fz]
    parts += [g for g, fz in zip(grads.colors, frozen) if not fz]
    parts.append(grads.background)
    return np.concatenate(parts)


def optimize_scale(
    scene: VectorScene,
    target,
    weights,
    cfg: OptimConfig,
    *,
    frozen=None,
    on_step=None,
    keep_best: bool = False,
    cutoff: float = DEFAULT_CUTOFF,
):
    """Run ``cfg.t_max`` Adam steps on a copy of ``scene``.

    Returns ``(scene, trace)`` where ``trace[j]`` is the total loss evaluated
    before step ``j``. Paths flagged in ``frozen`` keep their parameters.
    ``on_step(j, mse, xing, total)`` is called once per iteration.

    With ``keep_best`` the returned scene is the iterate with the lowest total
    loss (the final iterate included) instead of the last one. The Xing term
    jumps when a control polygon flips orientation, so the last iterate is not
    always the best.
    """
    cfg.validate()
    scene = scene.copy()
    trace: list[float] = []
    if cfg.t_max == 0:
        return scene, trace
    frozen = [False] * len(scene.paths) if frozen is None else list(frozen)
    params, is_point = _pack(scene, frozen)
    lr = np.where(is_point, cfg.alpha, cfg.beta)
    opt = Adam(params.size, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    best_loss, best_scene = np.inf, None
    for j in range(cfg.t_max):
        _, total, mse, xing, grads = loss_and_gradients(
            scene, target, weights, cfg.lam, cfg.gamma, cfg.samples_per_segment, cutoff
        )
        trace.append(total)
        if keep_best and total < best_loss:
            best_loss, best_scene = total, scene.copy()
        if on_step is not None:
            on_step(j, mse, xing, total)
        params = opt.step(params, _pack_grads(grads, frozen))
        _unpack(scene, frozen, params)
        # keep the optimizer state consistent with the clamped colours
        params, _ = _pack(scene, frozen)
    if keep_best:
        _, final = render_with_loss(
            scene, target, weights, cfg.lam, cfg.gamma, cfg.samples_per_segment, cutoff
        )
        if final > best_loss:
            scene = best_scene
    return scene, trace


def write_trace_csv(path, rows) -> None:
    """Write ``(iteration, mse, xing, total)`` rows with a header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "mse", "xing", "total"])
        for row in rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
