"""Backend selection for the compiled kernels.

Set ``TESSFAULT_DISABLE_NUMBA=1`` before import to force the pure-numpy paths.
"""

import os

DISABLE_ENV = "TESSFAULT_DISABLE_NUMBA"


def _disabled_by_env():
    return os.environ.get(DISABLE_ENV, "").strip().lower() in ("1", "true", "yes", "on")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(fn=None, **kw):
    """``numba.njit`` when numba is importable, identity otherwise.

    Kernels are compiled even when the env flag routes dispatch to numpy, so
    the benchmark can compare both paths in one process.
    """
    kw.setdefault("cache", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return numba.njit(**kw)(f)

    return wrap(fn) if fn is not None else wrap


def backend():
    return "numba" if USE_NUMBA else "numpy"
