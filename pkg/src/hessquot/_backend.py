"""Kernel backend selection.

Hot kernels are compiled with numba when it is importable and not disabled.
Set ``HESSQUOT_DISABLE_NUMBA=1`` to force the pure-numpy fallback path.
The flag is read once, at import time.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_requested():
    return os.environ.get("HESSQUOT_DISABLE_NUMBA", "0").strip().lower() in _FALSY


try:
    if not _numba_requested():
        raise ImportError("numba disabled by HESSQUOT_DISABLE_NUMBA")
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"


def njit(fn):
    """Compile ``fn`` in nopython mode; identity when numba is unavailable."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
