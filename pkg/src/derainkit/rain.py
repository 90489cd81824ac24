"""Additive rain composition, synthetic streak rendering, and paired
dataset ingestion."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .image import check_same_shape, load_image, validate_image


@dataclass(frozen=True)
class StreakParams:
    """Synthetic rain-streak generator knobs."""

    count: int = 40
    angle_deg: float = 10.0  # mean fall angle from vertical
    angle_jitter_deg: float = 4.0
    length_px: float = 18.0
    length_jitter_px: float = 6.0
    width_px: float = 1.2
    intensity: float = 0.4  # additive brightness
    seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError("intensity must be in [0, 1]")
        if self.angle_jitter_deg < 0 or self.length_jitter_px < 0:
            raise ValueError("jitters must be >= 0")
        if self.width_px <= 0:
            raise ValueError("width_px must be > 0")


@dataclass
class PairedSample:
    """One rainy/clean training pair."""

    name: str
    rainy: np.ndarray
    clean: np.ndarray

    def __post_init__(self):
        check_same_shape(self.rainy, self.clean, f"{self.name}: rainy/clean shapes")


def compose_rainy(B: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Additive rain model: clamp(B + S) with a non-negative streak map."""
    B = validate_image(B, "B")
    S = np.asarray(S, dtype=np.float64)
    if B.ndim == 3 and S.ndim == 2:
        S = S[..., None]
    if B.shape[:2] != S.shape[:2]:
        raise ValueError(f"background/streak shape mismatch: {B.shape} vs {S.shape}")
    if np.min(S) < 0:
        raise ValueError("streak map must be non-negative")
    return np.clip(B + S, 0.0, 1.0)


def synth_streaks(width: int, height: int, params: StreakParams) -> np.ndarray:
    """Render anti-aliased rain streaks: line segments with a Gaussian
    cross-section, combined by per-pixel maximum so overlaps never exceed
    the configured intensity. Deterministic for a fixed seed."""
    rng = np.random.default_rng(params.seed)
    s = np.zeros((height, width), dtype=np.float64)
    sigma = params.width_px / 2.0
    reach = 3.0 * sigma
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    for _ in range(params.count):
        cx = rng.uniform(0, width)
        cy = rng.uniform(0, height)
        ang = np.deg2rad(
            params.angle_deg + params.angle_jitter_deg * rng.standard_normal()
        )
        length = max(1.0, params.length_px + params.length_jitter_px * rng.standard_normal())
        # direction of fall: mostly downward, tilted by ang from vertical
        dy, dx = np.cos(ang), np.sin(ang)
        half = length / 2.0
        x0, y0 = cx - dx * half, cy - dy * half
        x1, y1 = cx + dx * half, cy + dy * half
        lo_y = max(0, int(np.floor(min(y0, y1) - reach)))
        hi_y = min(height, int(np.ceil(max(y0, y1) + reach)) + 1)
        lo_x = max(0, int(np.floor(min(x0, x1) - reach)))
        hi_x = min(width, int(np.ceil(max(x0, x1) + reach)) + 1)
        if lo_y >= hi_y or lo_x >= hi_x:
            continue
        py = ys[lo_y:hi_y, lo_x:hi_x] - y0
        px = xs[lo_y:hi_y, lo_x:hi_x] - x0
        # distance to the segment [(x0,y0), (x1,y1)]
        t = np.clip((px * dx + py * dy) / length, 0.0, 1.0) * length
        d2 = (px - t * dx) ** 2 + (py - t * dy) ** 2
        patch = params.intensity * np.exp(-d2 / (2.0 * sigma**2))
        np.maximum(s[lo_y:hi_y, lo_x:hi_x], patch, out=s[lo_y:hi_y, lo_x:hi_x])
    return s


def synth_background(width: int, height: int, seed: int) -> np.ndarray:
    """Smooth synthetic background scene: a few random low-frequency
    sinusoidal gradients per channel. Deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    yy = yy / max(height, 1)
    xx = xx / max(width, 1)
    channels = []
    for _ in range(3):
        img = np.full((height, width), rng.uniform(0.35, 0.65))
        for _ in range(5):
            fy, fx = rng.uniform(-4.0, 4.0, size=2)
            phase = rng.uniform(0, 2 * np.pi)
            img += rng.uniform(0.04, 0.14) * np.sin(2 * np.pi * (fy * yy + fx * xx) + phase)
        channels.append(img)
    return np.clip(np.stack(channels, axis=-1), 0.0, 1.0)


def load_pairs(
    rainy_dir: str | os.PathLike,
    clean_dir: str | os.PathLike,
    strip_suffix: bool = False,
) -> list[PairedSample]:
    """Load rainy/clean pairs matched by file stem.

    With strip_suffix=True a trailing "_<digits>" on the rainy stem is
    dropped before matching (Rain1400-style "x_1.png" -> clean "x.png").
    """
    rainy_dir, clean_dir = Path(rainy_dir), Path(clean_dir)
    exts = {".png", ".ppm"}
    clean_files = {p.stem: p for p in clean_dir.iterdir() if p.suffix.lower() in exts}
    samples = []
    for rp in sorted(p for p in rainy_dir.iterdir() if p.suffix.lower() in exts):
        stem = rp.stem
        if strip_suffix and "_" in stem and stem.rsplit("_", 1)[1].isdigit():
            stem = stem.rsplit("_", 1)[0]
        cp = clean_files.get(stem)
        if cp is None:
            raise FileNotFoundError(f"no clean counterpart for rainy file {rp.name}")
        samples.append(PairedSample(rp.stem, load_image(rp), load_image(cp)))
    return samples


def random_crop(
    sample: PairedSample, size: int, rng: np.random.Generator
) -> PairedSample:
    """Crop the same size x size window out of both halves of a pair."""
    h, w = sample.rainy.shape[:2]
    if h < size or w < size:
        raise ValueError("image smaller than crop size")
    y = int(rng.integers(0, h - size + 1))
    x = int(rng.integers(0, w - size + 1))
    return PairedSample(
        sample.name,
        sample.rainy[y : y + size, x : x + size],
        sample.clean[y : y + size, x : x + size],
    )
