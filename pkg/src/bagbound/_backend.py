"""Kernel backend selection.

Hot inner loops (resampled SAA solves, count accumulation, the simplex
core) exist in two functionally equivalent forms: numba-jitted loops and
vectorized pure-numpy batch code.  The jitted path is the default; set the
environment variable ``BAGBOUND_NO_NUMBA=1`` before import to force the
numpy fallback (useful on platforms without numba, and for differential
testing of the two paths).
"""

import os

NO_NUMBA_ENV = "BAGBOUND_NO_NUMBA"


def _want_numba() -> bool:
    return os.environ.get(NO_NUMBA_ENV, "0") not in ("1", "true", "yes")


if _want_numba():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        """No-op replacement for numba.njit when the fallback is active."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
