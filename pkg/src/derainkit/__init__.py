"""derainkit: single-image rain removal via guided-filter decomposition
and a small attention-based restoration network."""

import os as _os

# DERAIN_THREADS caps BLAS/OpenMP parallelism; it must take effect before
# numpy first loads, which is why this package imports lazily below.
_threads = _os.environ.get("DERAIN_THREADS")
if _threads:
    for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "FilterParams",
    "decompose",
    "gif",
    "iwgif",
    "wgif",
    "__version__",
]

_FILTER_NAMES = {"FilterParams", "decompose", "gif", "iwgif", "wgif"}


def __getattr__(name):
    if name == "KERNEL_BACKEND":
        from ._kernels import BACKEND

        return BACKEND
    if name in _FILTER_NAMES:
        from . import filters

        return getattr(filters, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
