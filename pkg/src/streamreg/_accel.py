"""Numba shim: compile kernels when available, run them as plain Python when not.

The environment variable ``STREAMREG_NUMBA`` selects the backend: unset or
truthy means "compile with numba if importable", ``0``/``false``/``off`` forces
the uncompiled pure-numpy path. ``backend()`` reports which one is active.
"""

from __future__ import annotations

import os
import warnings

__all__ = ["NUMBA_ENABLED", "njit", "backend"]


def _want_numba() -> bool:
    flag = os.environ.get("STREAMREG_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


NUMBA_ENABLED = False

if _want_numba():
    try:
        from numba import njit as _numba_njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised only without numba
        warnings.warn(
            "numba is not importable; falling back to uncompiled kernels",
            stacklevel=2,
        )

if NUMBA_ENABLED:
    njit = _numba_njit
else:

    def njit(*args, **kwargs):
        """Pass-through decorator standing in for numba.njit."""
        if args and callable(args[0]):
            return args[0]

        def passthrough(func):
            return func

        return passthrough


def backend() -> str:
    """Name of the active kernel backend, ``numba`` or ``numpy``."""
    return "numba" if NUMBA_ENABLED else "numpy"
