"""Backend selection for the numeric kernels.

Kernels are written in the subset of Python/numpy that numba compiles.  By
default they are compiled with ``numba.njit``; setting the environment
variable ``MIRRORBANDIT_DISABLE_NUMBA=1`` (or running without numba
installed) leaves them as plain numpy functions.  Both paths consume the
random generator identically, so results agree across backends.
"""

import os

_FLAG = "MIRRORBANDIT_DISABLE_NUMBA"

_disabled = os.environ.get(_FLAG, "").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

BACKEND = "numba" if _numba is not None else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` with nogil and on-disk caching, or a no-op decorator."""
    if _numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("nogil", True)
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)
