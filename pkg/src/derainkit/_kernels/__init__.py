"""Kernel backend selection.

Both backends expose the same functions with identical semantics; the
benchmark (benchmarks/bench_kernels.py) shows each wins a different hot
loop, so selection is per kernel: the compiled Cython box sums beat the
cumsum-based numpy ones ~4.5x, while the BLAS-backed GEMM convolutions in
the fallback beat the compiled direct loops ~4x. The pure numpy fallback
is used for everything when the extension was not built, or when
DERAINKIT_NO_EXT=1 is set.
"""

import os

from . import _fallback

if os.environ.get("DERAINKIT_NO_EXT") == "1":
    _box_impl = _fallback
else:
    try:
        from . import _ext as _box_impl  # type: ignore[no-redef]
    except ImportError:
        _box_impl = _fallback

BACKEND = _box_impl.BACKEND
box_sum = _box_impl.box_sum
window_counts = _box_impl.window_counts
conv2d_forward = _fallback.conv2d_forward
conv2d_backward_input = _fallback.conv2d_backward_input
conv2d_backward_weights = _fallback.conv2d_backward_weights
