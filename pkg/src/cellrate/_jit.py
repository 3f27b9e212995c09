"""numba switch.

Kernels are compiled with numba when it is importable and ``CELLRATE_NUMBA``
is not set to ``0``. Otherwise the pure-numpy fallbacks in ``_kernels`` are
used. ``CELLRATE_THREADS`` caps numba's thread pool.
"""

import os

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is optional at runtime
    nb = None

USE_NUMBA = nb is not None and os.environ.get("CELLRATE_NUMBA", "1") != "0"


def njit(*args, **kwargs):
    if USE_NUMBA:
        return nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def thread_cap():
    """Worker count allowed by ``CELLRATE_THREADS`` (default: all cores)."""
    raw = os.environ.get("CELLRATE_THREADS")
    n = os.cpu_count() or 1
    if raw:
        try:
            n = max(1, min(n, int(raw)))
        except ValueError:
            pass
    return n

