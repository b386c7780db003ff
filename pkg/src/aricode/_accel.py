"""Numba acceleration switch.

Hot kernels ship in two builds: a numba ``@njit`` one and a pure-numpy
fallback.  The fallback is selected when numba is missing or when the
environment variable ``ARICODE_NO_NUMBA`` is set to a truthy value.
"""

import os

_flag = os.environ.get("ARICODE_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag not in ("", "0", "false", "no")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via ARICODE_NO_NUMBA")
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        """Decorator shim so kernel modules import without numba."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def use_numba() -> bool:
    """True when the compiled kernel path is active."""
    return HAVE_NUMBA
