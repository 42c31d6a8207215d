"""Backend selection for the hot kernels.

The compiled extension ``pdolab._kernels`` is used when it imports and
``PDOLAB_PURE`` is unset; otherwise the numpy implementations take over.
Both backends expose the same two routines:

``mode_product(x, mat)``
    contract axis 1 of a complex ``(A, m, B)`` array with an ``(m, k)`` matrix.
``pivot(tab, row, col)``
    in-place Gauss-Jordan pivot of a dense float tableau.
"""

import contextlib
import os

import numpy as np

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _pykernels}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = "compiled" if (_compiled is not None and not os.environ.get("PDOLAB_PURE")) else "python"


def available():
    return sorted(_BACKENDS)


def backend():
    """Name of the backend currently in use."""
    return _active


def set_backend(name):
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available()}")
    _active = name


@contextlib.contextmanager
def using(name):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def mode_product(x, mat):
    x = np.ascontiguousarray(x, dtype=np.complex128)
    mat = np.ascontiguousarray(mat, dtype=np.complex128)
    return _BACKENDS[_active].mode_product(x, mat)


def pivot(tab, row, col):
    if tab.dtype != np.float64 or not tab.flags.c_contiguous:
        raise TypeError("tableau must be a C-contiguous float64 array")
    _BACKENDS[_active].pivot(tab, row, col)
