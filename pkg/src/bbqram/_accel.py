"""
Optional numba acceleration.

Set ``BBQRAM_DISABLE_JIT=1`` before import to force the pure-numpy
kernels (useful for debugging, coverage, or platforms without numba).
"""
import os

DISABLE_ENV = "BBQRAM_DISABLE_JIT"

try:
    import numba
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kw):
        if len(args) == 1 and callable(args[0]) and not kw:
            return args[0]
        return lambda f: f


USE_JIT = HAVE_NUMBA and os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes")


def backend_name() -> str:
    return "numba" if USE_JIT else "numpy"
