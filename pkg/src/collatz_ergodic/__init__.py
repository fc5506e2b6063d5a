"""Exact-arithmetic ergodic experiments on Collatz-type branch maps."""

__version__ = "0.1.0"

from .dynamics import Cycle, Limits, apply, detect_cycle, hitting_time, orbit  # noqa: E402
from .mapmodel import (BUILTIN_MAPS, COLLATZ_S, COLLATZ_T, THREE_N_MINUS_ONE, BranchMap,  # noqa: E402
                       MapSpecError, parse_mapspec, validate)

__all__ = [
    "BUILTIN_MAPS", "BranchMap", "COLLATZ_S", "COLLATZ_T", "Cycle", "Limits", "MapSpecError",
    "THREE_N_MINUS_ONE", "apply", "detect_cycle", "hitting_time", "orbit", "parse_mapspec",
    "validate",
]
