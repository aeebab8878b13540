"""Numba switch.

Set ``RINGSQUEEZE_DISABLE_NUMBA=1`` to route every kernel through its
pure-numpy implementation. Numba is also skipped when it is not importable.
"""

from __future__ import annotations

import os
import types

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

DISABLED_BY_ENV = os.environ.get("RINGSQUEEZE_DISABLE_NUMBA", "").strip().lower() not in (
    "",
    "0",
    "false",
    "no",
)
NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not DISABLED_BY_ENV


def jit(func):
    """Compile ``func`` in nopython mode when numba is importable.

    Compilation is lazy, so importing a module never pays for it. Whether the
    compiled object is actually *used* is decided by ``USE_NUMBA`` at the call
    sites in :mod:`ringsqueeze.kernels`.
    """
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def rebind(func, **names):
    """Copy of ``func`` whose module globals ``names`` are replaced.

    Used to compile one Python source against compiled helpers, keeping a
    plain module-level function that numba can cache.
    """
    g = dict(func.__globals__)
    g.update(names)
    out = types.FunctionType(func.__code__, g, func.__name__, func.__defaults__, func.__closure__)
    out.__qualname__ = func.__qualname__ + "_compiled"
    out.__module__ = func.__module__
    return out
