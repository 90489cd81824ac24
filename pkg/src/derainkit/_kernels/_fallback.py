"""Pure-numpy kernels: summed-area-table box sums and im2col convolutions.

Used whenever the compiled extension is unavailable (or disabled via
DERAINKIT_NO_EXT=1). Results match the extension to floating-point
round-off.
"""

import numpy as np

BACKEND = "numpy"


def box_sum(img: np.ndarray, zeta: int) -> np.ndarray:
    """Sum of img over the square window of radius zeta centered at each
    pixel, windows clipped to the image bounds. O(M) via a summed-area
    table, independent of zeta."""
    h, w = img.shape
    sat = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(img, axis=0, out=sat[1:, 1:])
    np.cumsum(sat[1:, 1:], axis=1, out=sat[1:, 1:])
    y0 = np.clip(np.arange(h) - zeta, 0, h)
    y1 = np.clip(np.arange(h) + zeta + 1, 0, h)
    x0 = np.clip(np.arange(w) - zeta, 0, w)
    x1 = np.clip(np.arange(w) + zeta + 1, 0, w)
    return (
        sat[np.ix_(y1, x1)]
        - sat[np.ix_(y0, x1)]
        - sat[np.ix_(y1, x0)]
        + sat[np.ix_(y0, x0)]
    )


def window_counts(h: int, w: int, zeta: int) -> np.ndarray:
    """Per-pixel cardinality of the clipped window."""
    ny = np.clip(np.arange(h) + zeta + 1, 0, h) - np.clip(np.arange(h) - zeta, 0, h)
    nx = np.clip(np.arange(w) + zeta + 1, 0, w) - np.clip(np.arange(w) - zeta, 0, w)
    return (ny[:, None] * nx[None, :]).astype(np.float64)


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-size convolution (stride 1, zero padding k//2) for odd k.

    The channel contraction runs as a single GEMM; the k*k kernel taps are
    then combined by cheap shifted accumulations, so no im2col blowup.
    """
    n, c, h, wd = x.shape
    o, _, k, _ = w.shape
    xt = np.ascontiguousarray(x.transpose(0, 2, 3, 1))  # (N, H, W, C)
    if k == 1:
        y = xt.reshape(-1, c) @ w[:, :, 0, 0].T + b
        return np.ascontiguousarray(y.reshape(n, h, wd, o).transpose(0, 3, 1, 2))
    p = k // 2
    # t[n, y, x, o, ki, kj] = sum_c x[n, c, y, x] * w[o, c, ki, kj]
    t = (xt.reshape(-1, c) @ w.transpose(1, 0, 2, 3).reshape(c, -1)).reshape(
        n, h, wd, o, k, k
    )
    y = np.zeros((n, h, wd, o))
    for ki in range(k):
        si = p - ki  # output-row shift of this tap
        ss0, ss1 = max(0, -si), h - max(0, si)
        for kj in range(k):
            sj = p - kj
            ts0, ts1 = max(0, -sj), wd - max(0, sj)
            y[:, ss0 + si : ss1 + si, ts0 + sj : ts1 + sj] += t[
                :, ss0:ss1, ts0:ts1, :, ki, kj
            ]
    y += b
    return np.ascontiguousarray(y.transpose(0, 3, 1, 2))


def conv2d_backward_input(gy: np.ndarray, w: np.ndarray) -> np.ndarray:
    # full correlation with the flipped, transposed kernel keeps the same
    # spatial size for stride-1 same-padding
    w_t = w[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
    o = w_t.shape[0]
    return conv2d_forward(gy, np.ascontiguousarray(w_t), np.zeros(o))


def conv2d_backward_weights(gy: np.ndarray, x: np.ndarray, k: int):
    n, c, h, wd = x.shape
    o = gy.shape[1]
    gb = gy.sum(axis=(0, 2, 3))
    if k == 1:
        gw = np.tensordot(gy, x, axes=([0, 2, 3], [0, 2, 3]))[:, :, None, None]
        return gw, gb
    p = k // 2
    # scatter gy into per-tap shifted slabs (adjoint of the forward
    # accumulation), then contract all taps against x in one GEMM
    tg = np.zeros((n, h, wd, o, k, k))
    gyt = gy.transpose(0, 2, 3, 1)
    for ki in range(k):
        si = p - ki
        ss0, ss1 = max(0, -si), h - max(0, si)
        for kj in range(k):
            sj = p - kj
            ts0, ts1 = max(0, -sj), wd - max(0, sj)
            tg[:, ss0:ss1, ts0:ts1, :, ki, kj] = gyt[
                :, ss0 + si : ss1 + si, ts0 + sj : ts1 + sj
            ]
    xt = np.ascontiguousarray(x.transpose(0, 2, 3, 1)).reshape(-1, c)
    gw = (xt.T @ tg.reshape(-1, o * k * k)).reshape(c, o, k, k)
    return np.ascontiguousarray(gw.transpose(1, 0, 2, 3)), gb
