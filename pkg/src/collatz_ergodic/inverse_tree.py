"""Predecessors and preimage levels ``T^-j(A)``."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .mapmodel import BranchMap

DEFAULT_DEPTH_CAP = 64
DEFAULT_MAX_ELEMENTS = 5_000_000
_I64_MAX = np.iinfo(np.int64).max


class DepthCapExceeded(ValueError):
    pass


class InfinitePreimage(ValueError):
    """A constant branch maps a whole residue class onto the queried value."""


@dataclass(frozen=True)
class LevelSet:
    root_set: frozenset
    level: int
    elements: frozenset

    def sorted(self) -> list[int]:
        return sorted(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, n) -> bool:
        return n in self.elements


def predecessors(bmap: BranchMap, n: int) -> frozenset:
    """All ``x >= 1`` with ``bmap(x) == n``, solved branch by branch."""
    m = bmap.modulus
    out = set()
    for r, (a, b, d) in enumerate(bmap.branches):
        if a == 0:
            if b // d == n:
                raise InfinitePreimage(f"every n = {r} (mod {m}) maps to {n}")
            continue
        num = d * n - b
        if num % a:
            continue
        x = num // a
        if x >= 1 and x % m == r:
            out.add(x)
    return frozenset(out)


def preimage(bmap: BranchMap, A: Iterable[int]) -> frozenset:
    out = set()
    for n in A:
        out |= predecessors(bmap, n)
    return frozenset(out)


def expand(bmap: BranchMap, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized preimage of an array of distinct values.

    Returns ``(preds, parent)`` where ``bmap(preds[i]) == values[parent[i]]``.
    Switches to object arrays (python ints) when int64 could overflow.
    """
    m = bmap.modulus
    if values.size == 0:
        return values.copy(), np.zeros(0, np.intp)
    if values.dtype != object:
        hi = int(values.max())
        if hi > (_I64_MAX - bmap.max_abs_b) // bmap.max_d:
            values = values.astype(object)
    preds, parents = [], []
    for r, (a, b, d) in enumerate(bmap.branches):
        if a == 0:
            if np.any(values == b // d):
                raise InfinitePreimage(f"every n = {r} (mod {m}) maps to {b // d}")
            continue
        num = d * values - b
        ok = (num % a == 0).astype(bool)
        x = num // a
        ok &= (x >= 1).astype(bool) & (x % m == r).astype(bool)
        idx = np.flatnonzero(ok)
        preds.append(x[idx])
        parents.append(idx)
    return np.concatenate(preds), np.concatenate(parents)


def _as_array(A: Iterable[int]) -> np.ndarray:
    vals = sorted(set(A))
    if vals and vals[-1] > _I64_MAX:
        return np.array(vals, dtype=object)
    return np.array(vals, dtype=np.int64)


@lru_cache(maxsize=512)
def _level_cached(bmap: BranchMap, roots: frozenset, j: int, max_elements: int) -> frozenset:
    if j == 0:
        return roots
    prev = _level_cached(bmap, roots, j - 1, max_elements)
    preds, _ = expand(bmap, _as_array(prev))
    if preds.size > max_elements:
        raise DepthCapExceeded(f"level {j} has {preds.size} elements (> {max_elements})")
    return frozenset(int(x) for x in preds)


def level(bmap: BranchMap, A: Iterable[int], j: int, depth_cap: int = DEFAULT_DEPTH_CAP,
          max_elements: int = DEFAULT_MAX_ELEMENTS) -> LevelSet:
    """``T^-j(A)`` as a :class:`LevelSet`."""
    if j < 0:
        raise ValueError("level index must be >= 0")
    if j > depth_cap:
        raise DepthCapExceeded(f"level {j} exceeds depth cap {depth_cap}")
    roots = frozenset(A)
    return LevelSet(roots, j, _level_cached(bmap, roots, j, max_elements))


@dataclass(frozen=True)
class WanderingResult:
    passed: bool
    pair: tuple[int, int] | None = None
    witness: int | None = None

    def __bool__(self) -> bool:
        return self.passed


def wandering_check(bmap: BranchMap, w: int, depth: int,
                    depth_cap: int = DEFAULT_DEPTH_CAP) -> WanderingResult:
    """Check that ``T^-i({w})`` and ``T^-j({w})`` are disjoint for ``0 <= i < j <= depth``.

    Reports the first colliding pair in order of increasing ``j``, then ``i``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    levels = [level(bmap, {w}, j, depth_cap).elements for j in range(depth + 1)]
    seen: dict[int, int] = {}
    for j, lev in enumerate(levels):
        hits = [(seen[x], x) for x in lev if x in seen]
        if hits:
            i = min(h[0] for h in hits)
            witness = min(x for (k, x) in hits if k == i)
            return WanderingResult(False, (i, j), witness)
        for x in lev:
            seen[x] = j
    return WanderingResult(True)
