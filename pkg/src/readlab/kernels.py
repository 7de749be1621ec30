"""Float hot loops: the compiled extension when importable, numpy otherwise.

Set ``READLAB_PURE=1`` to force the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("READLAB_PURE"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


# above this many rows the BLAS product in the numpy path beats the compiled loop
BATCH_SPLIT = 64


def read_norm_batch(X, V, r):
    X = _c(X)
    if X.ndim == 1:
        X = X[None, :]
    impl = _kernels_py if len(X) > BATCH_SPLIT else _impl
    return impl.read_norm_batch(X, _c(V), _c(r))


def covering_radius(mesh, dirs) -> float:
    return float(_impl.covering_radius(_c(mesh), _c(dirs)))


def l1_distances(dirs, center):
    return _impl.l1_distances(_c(dirs), _c(center))
