"""Anisotropic Gaussian blur pyramid, coarsest level first."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InputError
from .image_core import as_image, convolve2d, gradient_magnitude, laplacian

DEFAULT_SCHEDULE: tuple[tuple[float, float], ...] = ((4.0, 4.0), (2.0, 2.0), (1.0, 1.0))


@dataclass
class ScaleLevel:
    index: int
    mu: float  # std-dev along x (columns), pixels
    sigma: float  # std-dev along y (rows), pixels
    image: np.ndarray


@dataclass
class ScaleSpacePyramid:
    levels: list[ScaleLevel] = field(default_factory=list)
    grad_weight: float = 0.0
    lap_weight: float = 0.0

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, t: int) -> ScaleLevel:
        return self.levels[t]

    def dump(self, directory) -> None:
        from .image_io import write_image

        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for level in self.levels:
            write_image(directory / f"pyramid_t{level.index}.png", level.image)


def _gauss_1d(std: float) -> np.ndarray:
    radius = math.ceil(3.0 * std)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / std) ** 2)
    return g / g.sum()


def make_aniso_kernel(mu: float, sigma: float) -> np.ndarray:
    """Axis-aligned Gaussian with std-dev ``mu`` along x and ``sigma`` along y.

    Radius per axis is ``ceil(3 * std)``; the result is renormalized to sum 1.
    """
    if not (mu > 0 and sigma > 0) or not (math.isfinite(mu) and math.isfinite(sigma)):
        raise InputError(f"kernel std-devs must be positive, got mu={mu}, sigma={sigma}")
    kernel = np.outer(_gauss_1d(sigma), _gauss_1d(mu))
    return kernel / kernel.sum()


def validate_schedule(schedule) -> list[tuple[float, float]]:
    sched = [(float(m), float(s)) for m, s in schedule]
    if not sched:
        raise ConfigError("scale schedule must contain at least one level")
    for m, s in sched:
        if not (m > 0 and s > 0):
            raise ConfigError(f"schedule entries must be positive, got {(m, s)}")
    for (m0, s0), (m1, s1) in zip(sched, sched[1:]):
        if not (m1 < m0 and s1 < s0):
            raise ConfigError(
                f"schedule must decrease strictly in both parameters: {(m0, s0)} -> {(m1, s1)}"
            )
    return sched


def build_pyramid(
    source,
    schedule=DEFAULT_SCHEDULE,
    w_g: float = 0.0,
    w_l: float = 0.0,
) -> ScaleSpacePyramid:
    """Blur ``source`` once per schedule entry and add the weighted detail terms.

    Each level is ``clip(G(mu, sigma) * I + w_g * |grad I| + w_l * lap I, 0, 1)``
    with the gradient and Laplacian taken from the unblurred source.
    """
    sched = validate_schedule(schedule)
    if w_g < 0 or w_l < 0:
        raise ConfigError("detail weights must be non-negative")
    source = as_image(source)
    detail = None
    if w_g != 0.0:
        detail = w_g * gradient_magnitude(source)
    if w_l != 0.0:
        lap = w_l * laplacian(source)
        detail = lap if detail is None else detail + lap
    levels = []
    for t, (mu, sigma) in enumerate(sched):
        img = convolve2d(source, make_aniso_kernel(mu, sigma))
        if detail is not None:
            img = img + detail
        levels.append(ScaleLevel(t, mu, sigma, np.clip(img, 0.0, 1.0)))
    return ScaleSpacePyramid(levels, float(w_g), float(w_l))
