"""Kernel dispatch: compiled Cython core when importable, numpy fallback otherwise.

Set ``CAMROUTE_PURE=1`` in the environment to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("CAMROUTE_PURE"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def triangle_mask(px, py, tri):
    """uint8 mask of the points lying in the closed triangle ``(x0, y0, x1, y1, x2, y2)``."""
    return _impl.triangle_mask(_f64(px), _f64(py), tuple(float(v) for v in tri))


def coverage_matrix(px, py, tris):
    """Row k is ``triangle_mask`` of the points against ``tris[k]``."""
    tris = _f64(tris).reshape(-1, 6)
    return _impl.coverage_matrix(_f64(px), _f64(py), tris)


def gabriel_mask(ox, oy, nx, ny):
    """Keep-flags for the edges owner->neighbor under the Gabriel witness test."""
    return _impl.gabriel_mask(float(ox), float(oy), _f64(nx), _f64(ny))


__all__ = ["BACKEND", "triangle_mask", "coverage_matrix", "gabriel_mask"]
