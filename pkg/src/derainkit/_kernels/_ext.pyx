# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: running-sum box filter and direct convolutions.

Mirrors _fallback.py exactly; selected at import by derainkit._kernels.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def box_sum(cnp.float64_t[:, :] img, int zeta):
    cdef int h = img.shape[0]
    cdef int w = img.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] row = np.empty((h, w), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((h, w), dtype=np.float64)
    cdef cnp.float64_t[:, :] rowv = row
    cdef cnp.float64_t[:, :] outv = out
    cdef int y, x
    cdef double s

    # horizontal running sums over clipped [x-zeta, x+zeta]
    for y in range(h):
        s = 0.0
        for x in range(min(zeta + 1, w)):
            s += img[y, x]
        rowv[y, 0] = s
        for x in range(1, w):
            if x + zeta < w:
                s += img[y, x + zeta]
            if x - zeta - 1 >= 0:
                s -= img[y, x - zeta - 1]
            rowv[y, x] = s

    # vertical running sums of the row sums
    for x in range(w):
        s = 0.0
        for y in range(min(zeta + 1, h)):
            s += rowv[y, x]
        outv[0, x] = s
    for y in range(1, h):
        for x in range(w):
            outv[y, x] = outv[y - 1, x]
            if y + zeta < h:
                outv[y, x] += rowv[y + zeta, x]
            if y - zeta - 1 >= 0:
                outv[y, x] -= rowv[y - zeta - 1, x]
    return out


def window_counts(int h, int w, int zeta):
    ones = np.ones((h, w), dtype=np.float64)
    return box_sum(ones, zeta)


def _pad(x, int p):
    # zero padding around the two spatial axes, contiguous
    return np.pad(np.asarray(x), ((0, 0), (0, 0), (p, p), (p, p)))


def conv2d_forward(x, w, b):
    cdef cnp.float64_t[:, :, :, ::1] xp = _pad(x, w.shape[2] // 2)
    cdef cnp.float64_t[:, :, :, ::1] wv = np.ascontiguousarray(w)
    cdef cnp.float64_t[::1] bv = np.ascontiguousarray(b)
    cdef int n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef int o = wv.shape[0], k = wv.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=4] y = np.empty((n, o, h, wd))
    cdef cnp.float64_t[:, :, :, ::1] yv = y
    cdef int ni, oi, ci, yi, xi, ki, kj
    cdef double wk, bias

    for ni in range(n):
        for oi in range(o):
            bias = bv[oi]
            for yi in range(h):
                for xi in range(wd):
                    yv[ni, oi, yi, xi] = bias
            for ci in range(c):
                for ki in range(k):
                    for kj in range(k):
                        wk = wv[oi, ci, ki, kj]
                        if wk == 0.0:
                            continue
                        for yi in range(h):
                            # contiguous inner loop, vectorizable
                            for xi in range(wd):
                                yv[ni, oi, yi, xi] += wk * xp[ni, ci, yi + ki, xi + kj]
    return y


def conv2d_backward_input(gy, w):
    # gradient w.r.t. the input is a same-padding convolution of gy with
    # the flipped, transposed kernel
    w_t = np.ascontiguousarray(np.asarray(w)[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    return conv2d_forward(np.asarray(gy), w_t, np.zeros(w_t.shape[0]))


def conv2d_backward_weights(gy, x, int k):
    cdef cnp.float64_t[:, :, :, ::1] xp = _pad(x, k // 2)
    cdef cnp.float64_t[:, :, :, ::1] gyv = np.ascontiguousarray(gy)
    cdef int n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef int o = gyv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=4] gw = np.zeros((o, c, k, k))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gb = np.zeros(o)
    cdef cnp.float64_t[:, :, :, ::1] gwv = gw
    cdef cnp.float64_t[::1] gbv = gb
    cdef int ni, oi, ci, yi, xi, ki, kj
    cdef double acc

    for ni in range(n):
        for oi in range(o):
            acc = 0.0
            for yi in range(h):
                for xi in range(wd):
                    acc += gyv[ni, oi, yi, xi]
            gbv[oi] += acc
            for ci in range(c):
                for ki in range(k):
                    for kj in range(k):
                        acc = 0.0
                        for yi in range(h):
                            for xi in range(wd):
                                acc += gyv[ni, oi, yi, xi] * xp[ni, ci, yi + ki, xi + kj]
                        gwv[oi, ci, ki, kj] += acc
    return gw, gb
