"""Backend selection for the hot kernels.

Set ``CCPSOR_BACKEND=numpy`` to force the pure-numpy path (handy for
debugging, since numba tracebacks are hard to read). The numba path is used
whenever numba imports cleanly and the flag is unset or ``numba``.
"""
import os

_requested = os.environ.get("CCPSOR_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"CCPSOR_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _requested == "numba"


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator.

    Kernels decorated with this always compile when numba is importable, so
    both backends can be exercised in the same process (tests, benchmark).
    """
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
