"""Backend switch for the compiled kernels.

Set ``HKDROP_DISABLE_NUMBA=1`` to force the pure-numpy code paths; numba is
also skipped silently when it cannot be imported.
"""
import os

_FLAG = os.environ.get("HKDROP_DISABLE_NUMBA", "").strip().lower()

try:
    if _FLAG in ("1", "true", "yes", "on"):
        raise ImportError("numba disabled by HKDROP_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag in CI
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(func):
            return func

        return wrapper


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
