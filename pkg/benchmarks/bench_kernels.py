"""Benchmark the compiled extension against the numpy fallback on the two
hot kernels (sliding box sums, 3x3 convolution) and the full iWGIF filter.

Run:  python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from derainkit._kernels import _fallback
from derainkit.filters import FilterParams

try:
    from derainkit._kernels import _ext
except ImportError:
    _ext = None


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_box_sum(rows):
    rng = np.random.default_rng(0)
    for size in (256, 512):
        img = rng.standard_normal((size, size))
        for zeta in (2, 8):
            label = f"box_sum {size}x{size} zeta={zeta}"
            t_np = best_of(lambda: _fallback.box_sum(img, zeta))
            t_cy = best_of(lambda: _ext.box_sum(img, zeta)) if _ext else None
            rows.append((label, t_np, t_cy))


def bench_conv(rows):
    rng = np.random.default_rng(1)
    x = rng.standard_normal((8, 32, 32, 32))
    w = rng.standard_normal((32, 32, 3, 3))
    b = rng.standard_normal(32)
    gy = rng.standard_normal(x.shape[:1] + (32,) + x.shape[2:])
    cases = [
        ("conv3 forward 8x32x32x32", lambda m: m.conv2d_forward(x, w, b)),
        ("conv3 backward input", lambda m: m.conv2d_backward_input(gy, w)),
        ("conv3 backward weights", lambda m: m.conv2d_backward_weights(gy, x, 3)),
    ]
    for label, fn in cases:
        t_np = best_of(lambda: fn(_fallback))
        t_cy = best_of(lambda: fn(_ext)) if _ext else None
        rows.append((label, t_np, t_cy))


def bench_iwgif(rows):
    import derainkit.filters as filters

    rng = np.random.default_rng(2)
    img = rng.uniform(size=(512, 512))
    params = FilterParams(zeta=7)
    saved = filters._kernels
    try:
        for mod, col in ((_fallback, 0), (_ext, 1)):
            if mod is None:
                continue
            filters._kernels = mod
            t = best_of(lambda: filters.iwgif(img, img, params), repeats=3)
            if col == 0:
                rows.append(("iwgif 512x512 zeta=7", t, None))
            else:
                label, t_np, _ = rows.pop()
                rows.append((label, t_np, t))
    finally:
        filters._kernels = saved


def main():
    rows = []
    bench_box_sum(rows)
    bench_conv(rows)
    bench_iwgif(rows)
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'cython':>10}  {'speedup':>8}")
    for label, t_np, t_cy in rows:
        if t_cy is None:
            print(f"{label:<{width}}  {t_np * 1e3:>8.2f}ms  {'n/a':>10}  {'n/a':>8}")
        else:
            print(
                f"{label:<{width}}  {t_np * 1e3:>8.2f}ms  {t_cy * 1e3:>8.2f}ms"
                f"  {t_np / t_cy:>7.2f}x"
            )
    if _ext is None:
        print("\ncompiled extension not available; numpy fallback only")


if __name__ == "__main__":
    main()
