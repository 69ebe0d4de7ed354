"""8-bit PNG / PGM / PPM reading and writing."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .image_core import as_image

_GRAY_TOL = 1.0 / 255.0


def read_image(path) -> np.ndarray:
    """Load an 8-bit image as an ``(H, W, 3)`` float array in ``[0, 1]``."""
    with Image.open(path) as im:
        if im.mode in ("L", "P", "1", "I", "I;16"):
            im = im.convert("L")
        elif im.mode != "RGB":
            im = im.convert("RGB")
        data = np.asarray(im, dtype=np.float64)
    return as_image(data / 255.0)


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def is_gray(image: np.ndarray) -> bool:
    return bool(
        np.all(np.abs(image[:, :, 0] - image[:, :, 1]) <= _GRAY_TOL)
        and np.all(np.abs(image[:, :, 0] - image[:, :, 2]) <= _GRAY_TOL)
    )


def write_image(path, image: np.ndarray) -> None:
    """Write an image; grayscale content is stored as a single channel.

    Format follows the suffix (``.png``, ``.pgm``, ``.ppm``). A ``.pgm`` target
    always stores luminance as the channel mean.
    """
    path = Path(path)
    image = as_image(image)
    suffix = path.suffix.lower()
    if suffix == ".pgm" or (suffix != ".ppm" and is_gray(image)):
        pixels = to_uint8(image.mean(axis=2))
        im = Image.fromarray(pixels)
    else:
        im = Image.fromarray(to_uint8(image))
    fmt = {".png": "PNG", ".pgm": "PPM", ".ppm": "PPM"}.get(suffix, "PNG")
    # no timestamps or text chunks, so repeated writes are byte-identical
    im.save(path, format=fmt)
