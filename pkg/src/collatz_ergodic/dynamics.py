"""Forward iteration under explicit step and value limits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .mapmodel import BranchMap

DEFAULT_MAX_STEPS = 10**5
DEFAULT_MAX_VALUE = 2**256
ITERATE_CAP = 10**5

STEP_LIMIT = "step-limit"
VALUE_BOUND = "value-bound"
CYCLE = "cycle"


@dataclass(frozen=True)
class Limits:
    max_steps: int = DEFAULT_MAX_STEPS
    max_value: int = DEFAULT_MAX_VALUE

    def __post_init__(self):
        if self.max_steps < 1 or self.max_value < 1:
            raise ValueError(f"limits must be positive, got {self}")

    def to_dict(self) -> dict:
        return {"max_steps": self.max_steps, "max_value": self.max_value}


DEFAULT_LIMITS = Limits()


@dataclass(frozen=True)
class Cycle:
    """A periodic orbit, rotated so that its minimal element comes first."""

    elements: tuple[int, ...]

    @classmethod
    def from_orbit(cls, seq: Iterable[int]) -> "Cycle":
        seq = tuple(seq)
        i = seq.index(min(seq))
        return cls(seq[i:] + seq[:i])

    @property
    def length(self) -> int:
        return len(self.elements)

    @property
    def minimum(self) -> int:
        return self.elements[0]

    def __contains__(self, n) -> bool:
        return n in self._members

    @property
    def _members(self) -> frozenset:
        try:
            return self.__dict__["_memberset"]
        except KeyError:
            s = frozenset(self.elements)
            object.__setattr__(self, "_memberset", s)
            return s

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class EnteredCycle:
    cycle: Cycle
    hitting_time: int


@dataclass(frozen=True)
class StepLimit:
    reason = STEP_LIMIT


@dataclass(frozen=True)
class ValueBound:
    value: int
    reason = VALUE_BOUND


Outcome = Union[EnteredCycle, StepLimit, ValueBound]


@dataclass(frozen=True)
class OrbitResult:
    start: int
    iterates: tuple[int, ...]
    outcome: Outcome
    truncated: bool = False

    @property
    def resolved(self) -> bool:
        return isinstance(self.outcome, EnteredCycle)


@dataclass(frozen=True)
class NotFound:
    reason: str


@dataclass(frozen=True)
class NotReached:
    reason: str


def apply(bmap: BranchMap, n: int) -> int:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return bmap(n)


def orbit(bmap: BranchMap, n: int, limits: Limits = DEFAULT_LIMITS,
          iterate_cap: int = ITERATE_CAP) -> OrbitResult:
    """Iterate ``bmap`` from ``n`` until a value repeats or a limit is hit.

    The repeat of a cycle of length L entered at step k is seen at step k + L,
    so a resolved outcome needs k + L <= max_steps.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    iterates = [n]
    if n > limits.max_value:
        return OrbitResult(n, (n,), ValueBound(n))
    seen = {n: 0}
    x = n
    outcome: Outcome = StepLimit()
    for step in range(1, limits.max_steps + 1):
        x = bmap(x)
        if x > limits.max_value:
            outcome = ValueBound(x)
            break
        k = seen.get(x)
        if k is not None:
            if step <= iterate_cap:
                cyc = iterates[k:step]
            else:
                cyc = [x]
                y = bmap(x)
                while y != x:
                    cyc.append(y)
                    y = bmap(y)
            outcome = EnteredCycle(Cycle.from_orbit(cyc), k)
            break
        seen[x] = step
        if step < iterate_cap:
            iterates.append(x)
    truncated = len(iterates) < len(seen)
    return OrbitResult(n, tuple(iterates), outcome, truncated)


def detect_cycle(bmap: BranchMap, seed: int, limits: Limits = DEFAULT_LIMITS) -> Cycle | NotFound:
    out = orbit(bmap, seed, limits).outcome
    if isinstance(out, EnteredCycle):
        return out.cycle
    return NotFound(out.reason)


def hitting_time(bmap: BranchMap, n: int, target: Iterable[int],
                 limits: Limits = DEFAULT_LIMITS) -> int | NotReached:
    """Minimal ``k >= 0`` with ``T^k(n)`` in ``target``.

    Returns ``NotReached`` with reason ``"cycle"`` when the orbit closes a cycle
    that misses the target, otherwise ``"step-limit"`` or ``"value-bound"``.
    """
    target = target if isinstance(target, (set, frozenset)) else frozenset(target)
    if not target:
        raise ValueError("target set must be nonempty")
    x = n
    seen = set()
    for k in range(limits.max_steps + 1):
        if x > limits.max_value:
            return NotReached(VALUE_BOUND)
        if x in target:
            return k
        if x in seen:
            return NotReached(CYCLE)
        seen.add(x)
        x = bmap(x)
    return NotReached(STEP_LIMIT)
