"""Raster images and the local operators applied to them.

Images are plain ``float64`` arrays of shape ``(height, width, 3)`` holding
intensities nominally in ``[0, 1]``. Kernels are 2D arrays with odd extents;
``kernel.shape == (2*radius_y + 1, 2*radius_x + 1)``.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import InputError

_LAPLACE_STENCIL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


def as_image(data, *, copy: bool = False) -> np.ndarray:
    """Validate and coerce ``data`` into an ``(H, W, 3)`` float64 image.

    2D input is treated as grayscale and replicated across three channels.
    """
    arr = np.array(data, dtype=np.float64, copy=copy)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InputError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError("image must have positive width and height")
    if not np.all(np.isfinite(arr)):
        raise InputError("image contains non-finite values")
    return arr


def from_uint8(data) -> np.ndarray:
    return as_image(np.asarray(data, dtype=np.float64) / 255.0)


def constant_image(width: int, height: int, value) -> np.ndarray:
    img = np.empty((height, width, 3), dtype=np.float64)
    img[...] = value
    return img


def _check_kernel(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
        raise InputError(f"kernel extents must be odd, got {kernel.shape}")
    h, w = image.shape[:2]
    if kernel.shape[0] > 2 * h or kernel.shape[1] > 2 * w:
        raise InputError(
            f"kernel {kernel.shape} is larger than twice the image extent {(h, w)}"
        )
    if not np.all(np.isfinite(kernel)):
        raise InputError("kernel contains non-finite weights")
    return kernel


def convolve2d(image, kernel) -> np.ndarray:
    """Per-channel 2D correlation with reflect-101 borders.

    Kernels whose weights sum to 1 within 1e-9 are applied in difference form,
    ``I + sum_i w_i * (shift_i(I) - I)``, so constant images come back exactly.
    """
    image = as_image(image)
    kernel = _check_kernel(image, kernel)
    ky, kx = kernel.shape[0] // 2, kernel.shape[1] // 2
    h, w = image.shape[:2]
    padded = _pad_reflect101(image, ky, kx)
    normalized = abs(float(kernel.sum()) - 1.0) <= 1e-9
    out = image.copy() if normalized else np.zeros_like(image)
    for dy in range(kernel.shape[0]):
        for dx in range(kernel.shape[1]):
            wgt = kernel[dy, dx]
            if wgt == 0.0:
                continue
            window = padded[dy : dy + h, dx : dx + w]
            if normalized:
                out += wgt * (window - image)
            else:
                out += wgt * window
    return out


def _pad_reflect101(image: np.ndarray, py: int, px: int) -> np.ndarray:
    h, w = image.shape[:2]
    if (py > 0 and h == 1) or (px > 0 and w == 1):
        # a single row/column has nothing to mirror; reflect-101 degenerates to edge
        mode_y = "edge" if h == 1 else "reflect"
        mode_x = "edge" if w == 1 else "reflect"
        tmp = np.pad(image, ((py, py), (0, 0), (0, 0)), mode=mode_y)
        return np.pad(tmp, ((0, 0), (px, px), (0, 0)), mode=mode_x)
    return np.pad(image, ((py, py), (px, px), (0, 0)), mode="reflect")


def gradient_magnitude(image) -> np.ndarray:
    """Per-channel ``sqrt(gx**2 + gy**2)``.

    Central differences in the interior, one-sided at the borders.
    """
    image = as_image(image)
    if image.shape[0] < 2 or image.shape[1] < 2:
        raise InputError("gradient needs at least 2 pixels along each axis")
    gy, gx = np.gradient(image, axis=(0, 1))
    return np.sqrt(gx * gx + gy * gy)


def laplacian(image) -> np.ndarray:
    """5-point Laplacian per channel with reflect-101 borders."""
    image = as_image(image)
    if image.shape[0] < 3 or image.shape[1] < 3:
        raise InputError("laplacian needs at least 3 pixels along each axis")
    out = np.empty_like(image)
    for c in range(3):
        out[:, :, c] = ndimage.correlate(image[:, :, c], _LAPLACE_STENCIL, mode="mirror")
    return out
