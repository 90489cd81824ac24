"""PSNR and SSIM with CSV report serialization."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .image import check_same_shape, luminance, validate_image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB against peak 1.0; identical images
    return the +inf sentinel."""
    a = validate_image(a, "a")
    b = validate_image(b, "b")
    check_same_shape(a, b, "psnr shape mismatch")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gauss_kernel(size: int, sigma: float) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    return g / g.sum()


def _windowed_mean(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Separable Gaussian-weighted mean, cropped to the valid region."""
    r = len(k) // 2
    out = correlate1d(img, k, axis=0, mode="constant")
    out = correlate1d(out, k, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local structural similarity (11x11 Gaussian window, sigma 1.5)
    over the valid region; color images are compared on luminance."""
    a = validate_image(a, "a")
    b = validate_image(b, "b")
    check_same_shape(a, b, "ssim shape mismatch")
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"image too small for ssim: needs >= {SSIM_WINDOW} pixels per side")
    x, y = luminance(a), luminance(b)
    k = _gauss_kernel(SSIM_WINDOW, SSIM_SIGMA)
    mx = _windowed_mean(x, k)
    my = _windowed_mean(y, k)
    vx = _windowed_mean(x * x, k) - mx * mx
    vy = _windowed_mean(y * y, k) - my * my
    cxy = _windowed_mean(x * y, k) - mx * my
    num = (2.0 * mx * my + SSIM_C1) * (2.0 * cxy + SSIM_C2)
    den = (mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2)
    return float(np.mean(num / den))


@dataclass
class MetricReport:
    """Per-image PSNR/SSIM rows plus their arithmetic means."""

    per_image: list[tuple[str, float, float]] = field(default_factory=list)

    def add(self, name: str, psnr_db: float, ssim_val: float) -> None:
        self.per_image.append((name, psnr_db, ssim_val))

    @property
    def mean_psnr_db(self) -> float:
        return float(np.mean([r[1] for r in self.per_image]))

    @property
    def mean_ssim(self) -> float:
        return float(np.mean([r[2] for r in self.per_image]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["name", "psnr_db", "ssim"])
        for name, p, s in self.per_image:
            w.writerow([name, "inf" if math.isinf(p) else f"{p:.6f}", f"{s:.6f}"])
        w.writerow(
            [
                "mean",
                "inf" if math.isinf(self.mean_psnr_db) else f"{self.mean_psnr_db:.6f}",
                f"{self.mean_ssim:.6f}",
            ]
        )
        return buf.getvalue()
