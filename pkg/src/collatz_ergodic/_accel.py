"""Optional numba acceleration.

Set ``COLLATZ_ERGODIC_NUMBA=0`` to run every kernel as plain Python over numpy
arrays.  Results are identical either way; only speed differs.
"""
import logging
import os

_FALSE = {"0", "false", "no", "off"}


def _wanted() -> bool:
    return os.environ.get("COLLATZ_ERGODIC_NUMBA", "1").strip().lower() not in _FALSE


try:
    import numba
    logging.getLogger("numba").setLevel(logging.WARNING)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

NUMBA_ENABLED = HAVE_NUMBA and _wanted()


def jit(func):
    """``numba.njit(cache=True)`` when enabled, else ``func`` unchanged.

    The undecorated function stays reachable as ``.py_func`` in both cases.
    """
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(func)
    func.py_func = func
    return func
