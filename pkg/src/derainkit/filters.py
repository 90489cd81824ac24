"""Guided-filter family with O(M) sliding-window statistics.

All filters share the local linear model out = a*G + b fitted per window.
The improved variant combines an edge-aware regularization weight (from
normalized 3x3 local variances) with residual-driven aggregation of the
per-window coefficients. Window statistics use clipped windows normalized
by the true in-bounds cardinality, so no padding artifacts enter the math.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .image import check_same_shape, luminance, validate_image

W_FLOOR = 0.001  # additive floor on aggregation weights

# band large images into row slabs of roughly this many pixels so each
# slab's float64 working set stays cache-resident (~0.4 MB per array)
_BAND_PIXEL_LIMIT = 48 * 1024


@functools.lru_cache(maxsize=16)
def _window_counts(h: int, w: int, zeta: int) -> np.ndarray:
    """Clipped-window cardinalities, cached per shape (backend-independent
    integer values, so the cache is safe across kernel backends)."""
    counts = _kernels.window_counts(h, w, zeta)
    counts.setflags(write=False)
    return counts


@dataclass(frozen=True)
class FilterParams:
    """Knobs of the improved weighted guided filter."""

    zeta: int = 7  # window radius, pixels
    lam: float = 1e-3  # regularization on the slope
    epsilon: float = 1e-4  # edge-aware weighting stabilizer
    eta: float = 0.05  # residual-to-weight temperature

    def __post_init__(self):
        if int(self.zeta) != self.zeta or self.zeta < 1:
            raise ValueError(f"zeta must be a positive integer, got {self.zeta}")
        for name in ("lam", "epsilon", "eta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class WindowStats:
    """Per-pixel window means/variances/covariance for one radius."""

    mu_G: np.ndarray
    mu_I: np.ndarray
    mu_GI: np.ndarray
    var_G: np.ndarray
    var_I: np.ndarray
    cov_IG: np.ndarray
    window_count: np.ndarray


def box_mean(img: np.ndarray, zeta: int) -> np.ndarray:
    """Window mean with clipped windows, normalized by true cardinality.

    Runtime is independent of zeta (running sums / summed-area table).
    """
    img = validate_image(img)
    if zeta < 1:
        raise ValueError("zeta must be >= 1")
    counts = _window_counts(img.shape[0], img.shape[1], zeta)
    if img.ndim == 2:
        return _kernels.box_sum(np.ascontiguousarray(img), zeta) / counts
    return np.stack(
        [
            _kernels.box_sum(np.ascontiguousarray(img[..., c]), zeta) / counts
            for c in range(img.shape[2])
        ],
        axis=-1,
    )


def window_stats(I: np.ndarray, G: np.ndarray, zeta: int) -> WindowStats:
    """All second-order window statistics of a single-channel pair."""
    I = validate_image(I, "I")
    G = validate_image(G, "G")
    if I.shape != G.shape:
        raise ValueError(f"guidance/input shape mismatch: {I.shape} vs {G.shape}")
    self_guided = I is G or np.shares_memory(I, G)
    mu_G = box_mean(G, zeta)
    mu_GI = box_mean(G * (G if self_guided else I), zeta)
    var_G = np.maximum(mu_GI - mu_G * mu_G, 0.0) if self_guided else None
    if self_guided:
        # I == G: the second-moment statistics coincide
        mu_I, var_I, cov_IG = mu_G, var_G, var_G
    else:
        mu_I = box_mean(I, zeta)
        var_G = np.maximum(box_mean(G * G, zeta) - mu_G * mu_G, 0.0)
        var_I = np.maximum(box_mean(I * I, zeta) - mu_I * mu_I, 0.0)
        cov_IG = mu_GI - mu_G * mu_I
    counts = _window_counts(I.shape[0], I.shape[1], zeta)
    return WindowStats(mu_G, mu_I, mu_GI, var_G, var_I, cov_IG, counts)


def edge_aware_weight(G: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-pixel regularization weight from normalized 3x3 local variances.

    Gamma(p') = (var3(p') + eps) * mean_p[ 1 / (var3(p) + eps) ], which is
    O(M): the sum over all pixels is precomputed once.
    """
    G = validate_image(G, "G")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    var3 = _local_var3(G)
    inv_mean = np.mean(1.0 / (var3 + epsilon))
    return (var3 + epsilon) * inv_mean


def _local_var3(G: np.ndarray) -> np.ndarray:
    mu = box_mean(G, 1)
    return np.maximum(box_mean(G * G, 1) - mu * mu, 0.0)


def solve_coefficients(
    stats: WindowStats, gamma: np.ndarray, lam: float
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ridge solution of the per-window linear model."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    a = gamma * stats.cov_IG / (gamma * stats.var_G + lam)
    b = stats.mu_I - a * stats.mu_G
    return a, b


def residual_mse(
    stats: WindowStats, a: np.ndarray, gamma: np.ndarray, lam: float
) -> np.ndarray:
    """Mean squared fit residual per window, in closed form.

    Equals (1/|window|) * sum (a*G + b - I)^2 because a is the ridge
    optimum; clamped below at 0 against round-off.
    """
    res = stats.var_I - a * a * (stats.var_G + 2.0 * lam / gamma)
    return np.maximum(res, 0.0)


def aggregation_weights(residual: np.ndarray, eta: float) -> np.ndarray:
    """exp(-residual/eta) + floor; near 1 for well-fit windows."""
    if eta <= 0:
        raise ValueError("eta must be > 0")
    return np.exp(-residual / eta) + W_FLOOR


def _filter_family(
    I: np.ndarray,
    G: np.ndarray,
    zeta: int,
    lam: float,
    gamma_mode: str,
    epsilon: float | None,
    eta: float | None,
    clamp: bool,
) -> np.ndarray:
    """Shared core of gif/wgif/iwgif.

    gamma_mode: 'unit' or 'edge'. eta=None means plain coefficient
    averaging; otherwise residual-weighted aggregation.

    Color handling: the guidance is collapsed to luminance; the slope a is
    fitted on the luminance pair, the intercept b uses per-channel window
    means, and the aggregated model is evaluated against the luminance
    guidance per channel.
    """
    I = validate_image(I, "I")
    G = validate_image(G, "G")
    if I.shape != G.shape:
        raise ValueError(f"guidance/input shape mismatch: {I.shape} vs {G.shape}")
    if zeta < 1 or int(zeta) != zeta:
        raise ValueError("zeta must be a positive integer")
    if lam <= 0:
        raise ValueError("lam must be > 0")

    h, w = I.shape[:2]
    halo = 2 * zeta + 2  # reach of the two nested box passes plus var3
    if h * w > _BAND_PIXEL_LIMIT and h >= 4 * halo:
        # large image: evaluate in row bands (with halo rows recomputed)
        # so each slab's working set stays cache-resident. Exact: every
        # window that reaches a kept row lies fully inside its slab, and
        # the edge weight's global normalization is precomputed here.
        band = max(2 * halo, _BAND_PIXEL_LIMIT // w)
        if gamma_mode == "edge":
            # accumulate the global sum of 1/(var3+eps) band by band
            # (var3 has radius 1) so the prepass is cache-resident too
            g_full = luminance(G)
            total = 0.0
            for y0 in range(0, h, band):
                y1 = min(h, y0 + band)
                s0, s1 = max(0, y0 - 1), min(h, y1 + 1)
                v = _local_var3(g_full[s0:s1])[y0 - s0 : y0 - s0 + (y1 - y0)]
                total += float(np.sum(1.0 / (v + epsilon)))
            gamma_norm = total / (h * w)
        else:
            gamma_norm = None
        out = np.empty(I.shape, dtype=np.float64)
        for y0 in range(0, h, band):
            y1 = min(h, y0 + band)
            s0, s1 = max(0, y0 - halo), min(h, y1 + halo)
            gs = G[s0:s1]
            slab = _filter_core(
                I[s0:s1] if I is not G else gs,
                gs, zeta, lam, gamma_mode, epsilon, eta, gamma_norm,
            )
            out[y0:y1] = slab[y0 - s0 : y0 - s0 + (y1 - y0)]
    else:
        out = _filter_core(I, G, zeta, lam, gamma_mode, epsilon, eta, None)
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    return out


def _filter_core(
    I: np.ndarray,
    G: np.ndarray,
    zeta: int,
    lam: float,
    gamma_mode: str,
    epsilon: float | None,
    eta: float | None,
    gamma_norm: float | None,
) -> np.ndarray:
    g_lum = luminance(G)
    # self-guided filtering shares every luminance statistic
    i_lum = g_lum if (I is G or np.shares_memory(I, G)) else luminance(I)
    stats = window_stats(i_lum, g_lum, zeta)

    if gamma_mode == "edge":
        if gamma_norm is None:
            gamma = edge_aware_weight(g_lum, epsilon)
        else:
            gamma = (_local_var3(g_lum) + epsilon) * gamma_norm
    else:
        gamma = np.ones_like(g_lum)
    a, _ = solve_coefficients(stats, gamma, lam)

    if eta is None:
        w = np.ones_like(a)
    else:
        res = residual_mse(stats, a, gamma, lam)
        w = aggregation_weights(res, eta)

    # the clipped-window counts cancel in every box_sum ratio, and the
    # weight-sum denominator is shared by a_bar and every channel's b_bar
    w_sum = _kernels.box_sum(np.ascontiguousarray(w), zeta)
    a_bar = _kernels.box_sum(np.ascontiguousarray(w * a), zeta) / w_sum

    channels = I[..., None] if I.ndim == 2 else I
    out = np.empty_like(channels)
    for c in range(channels.shape[2]):
        # grayscale input: the channel is the luminance, mean already known
        mu_c = stats.mu_I if I.ndim == 2 else box_mean(channels[..., c], zeta)
        b_c = mu_c - a * stats.mu_G
        b_bar = _kernels.box_sum(np.ascontiguousarray(w * b_c), zeta) / w_sum
        out[..., c] = a_bar * g_lum + b_bar
    return out[..., 0] if I.ndim == 2 else out


def iwgif(
    I: np.ndarray, G: np.ndarray, params: FilterParams, clamp: bool = True
) -> np.ndarray:
    """Improved weighted guided filter: edge-aware regularization plus
    residual-weighted aggregation of the window coefficients. O(M)."""
    return _filter_family(
        I, G, params.zeta, params.lam, "edge", params.epsilon, params.eta, clamp
    )


def gif(I: np.ndarray, G: np.ndarray, zeta: int, lam: float) -> np.ndarray:
    """Plain guided filter: unit weighting, plain coefficient averaging."""
    return _filter_family(I, G, zeta, lam, "unit", None, None, True)


def wgif(
    I: np.ndarray, G: np.ndarray, zeta: int, lam: float, epsilon: float
) -> np.ndarray:
    """Weighted guided filter: edge-aware weighting, plain averaging."""
    return _filter_family(I, G, zeta, lam, "edge", epsilon, None, True)


def decompose(
    I: np.ndarray, params: FilterParams
) -> tuple[np.ndarray, np.ndarray]:
    """Split an image into a smooth base layer and a signed detail layer
    via self-guided filtering. base + detail reconstructs I exactly."""
    base = iwgif(I, I, params, clamp=False)
    return base, I - base
