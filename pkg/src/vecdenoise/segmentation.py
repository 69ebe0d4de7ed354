"""Colour-coherent connected components and their redraw schedule."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .image_core import as_image

# 4-connectivity, fixed order keeps the flood fill deterministic
_NEIGHBOURS = ((-1, 0), (0, -1), (0, 1), (1, 0))


@dataclass
class Component:
    id: int
    mask: np.ndarray  # bool, (H, W)
    area: int
    bbox: tuple[int, int, int, int]  # x_min, y_min, x_max, y_max (inclusive)
    mean_color: np.ndarray
    source_level: int = 0

    @classmethod
    def from_mask(cls, id: int, mask: np.ndarray, image: np.ndarray, source_level: int = 0):
        ys, xs = np.nonzero(mask)
        if len(ys) == 0:
            raise InputError("component mask is empty")
        bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
        return cls(id, mask, int(len(ys)), bbox, image[mask].mean(axis=0), source_level)


def segment_components(
    image,
    tau_seg: float = 0.05,
    min_area: int = 16,
    *,
    region=None,
    source_level: int = 0,
    first_id: int = 0,
) -> list[Component]:
    """Region-growing flood fill.

    Seeds are taken in raster order. A 4-neighbour joins the growing region if
    the channel-mean absolute difference between its colour and the region's
    running mean colour is at most ``tau_seg``. Regions smaller than
    ``min_area`` are dropped; their pixels stay unassigned. If ``region`` is
    given, only pixels where it is true take part.
    """
    if not tau_seg > 0:
        raise InputError("tau_seg must be positive")
    if min_area < 1:
        raise InputError("min_area must be at least 1")
    image = as_image(image)
    h, w = image.shape[:2]
    if region is None:
        eligible = np.ones((h, w), dtype=bool)
    else:
        eligible = np.asarray(region, dtype=bool)
        if eligible.shape != (h, w):
            raise InputError("region mask does not match the image")
    visited = ~eligible
    pixels = image.tolist()
    components = []
    next_id = first_id
    for sy, sx in zip(*np.nonzero(eligible)):
        if visited[sy, sx]:
            continue
        visited[sy, sx] = True
        total = list(pixels[sy][sx])
        count = 1
        members = [(sy, sx)]
        queue = deque(members)
        while queue:
            y, x = queue.popleft()
            for dy, dx in _NEIGHBOURS:
                ny, nx = y + dy, x + dx
                if ny < 0 or nx < 0 or ny >= h or nx >= w or visited[ny, nx]:
                    continue
                c = pixels[ny][nx]
                dist = (
                    abs(c[0] - total[0] / count)
                    + abs(c[1] - total[1] / count)
                    + abs(c[2] - total[2] / count)
                ) / 3.0
                if dist <= tau_seg:
                    visited[ny, nx] = True
                    total[0] += c[0]
                    total[1] += c[1]
                    total[2] += c[2]
                    count += 1
                    members.append((ny, nx))
                    queue.append((ny, nx))
        if count < min_area:
            continue
        mask = np.zeros((h, w), dtype=bool)
        ys, xs = zip(*members)
        mask[list(ys), list(xs)] = True
        components.append(Component.from_mask(next_id, mask, image, source_level))
        next_id += 1
    return components


def component_diff(component: Component, redrawn, reference) -> float:
    """Mean absolute difference over the component's pixels and channels."""
    mask = component.mask
    if not mask.any():
        raise InputError("component mask is empty")
    redrawn = np.asarray(redrawn, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if redrawn.shape[:2] != mask.shape or reference.shape[:2] != mask.shape:
        raise InputError("images and component mask must share dimensions")
    return float(np.abs(redrawn[mask] - reference[mask]).mean())


def schedule_components(components) -> list[int]:
    """Component ids ordered by decreasing area, ties by ascending id."""
    return [c.id for c in sorted(components, key=lambda c: (-c.area, c.id))]


def residual_mask(level_image, render, tau_new: float) -> np.ndarray:
    diff = np.abs(np.asarray(level_image) - np.asarray(render)).mean(axis=2)
    return diff > tau_new


def new_components_at_scale(
    level_image,
    existing_scene_render,
    tau_seg: float = 0.05,
    min_area: int = 16,
    tau_new: float = 0.05,
    *,
    source_level: int = 0,
    first_id: int = 0,
) -> list[Component]:
    """Components of the level image restricted to under-explained pixels."""
    level_image = as_image(level_image)
    render = as_image(existing_scene_render)
    if level_image.shape != render.shape:
        raise InputError("level image and render must share dimensions")
    resid = residual_mask(level_image, render, tau_new)
    if not resid.any():
        return []
    return segment_components(
        level_image,
        tau_seg,
        min_area,
        region=resid,
        source_level=source_level,
        first_id=first_id,
    )


def label_map(components, shape) -> np.ndarray:
    """Integer label image, 0 for unassigned pixels and ``i + 1`` for component i."""
    labels = np.zeros(shape, dtype=np.int32)
    for i, comp in enumerate(components):
        labels[comp.mask] = i + 1
    return labels


def dump_label_map(path, components, shape) -> None:
    from .image_io import write_image

    labels = label_map(components, shape)
    rng = np.random.default_rng(12345)
    palette = np.vstack([np.zeros((1, 3)), rng.random((max(len(components), 1), 3))])
    write_image(path, palette[labels])
