"""Numba switch.

Kernels are written in the nopython subset and decorated with :func:`njit`.
Setting ``BALLISTIC_NO_NUMBA=1`` in the environment (before import) leaves
them as plain Python functions over numpy arrays; results are identical,
only slower.
"""

import os

_DISABLED = os.environ.get("BALLISTIC_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_ENABLED = numba is not None and not _DISABLED


def njit(*args, **kwargs):
    if NUMBA_ENABLED:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
