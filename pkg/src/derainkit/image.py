"""Image carrier conventions and PNG/PPM I/O.

Images are numpy float64 arrays in [0, 1], shaped (H, W) for grayscale or
(H, W, 3) for color.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image as PILImage

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def validate_image(img: np.ndarray, name: str = "image") -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.size == 0:
        raise ValueError("empty image")
    if img.ndim == 3:
        if img.shape[2] != 3:
            raise ValueError(f"{name}: expected 1 or 3 channels, got {img.shape[2]}")
    elif img.ndim != 2:
        raise ValueError(f"{name}: expected 2-D or 3-D array, got ndim={img.ndim}")
    if not np.all(np.isfinite(img)):
        raise ValueError(f"{name}: non-finite values")
    return img


def luminance(img: np.ndarray) -> np.ndarray:
    """Rec. 601 luminance; identity on grayscale."""
    if img.ndim == 2:
        return img
    r, g, b = LUMA_WEIGHTS
    return r * img[..., 0] + g * img[..., 1] + b * img[..., 2]


def check_same_shape(a: np.ndarray, b: np.ndarray, msg: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{msg}: {a.shape} vs {b.shape}")


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read a PNG or binary PPM (P6) into a [0, 1] float array."""
    with PILImage.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    return validate_image(arr, str(path))


def save_image(path: str | os.PathLike, img: np.ndarray) -> None:
    """Write a [0, 1] float array as an 8-bit PNG."""
    img = validate_image(img)
    q = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    PILImage.fromarray(q, mode="L" if q.ndim == 2 else "RGB").save(path, format="PNG")
