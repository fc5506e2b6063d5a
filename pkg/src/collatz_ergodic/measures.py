"""Tree measures on basins, invariant measures, and the power-bound verifier.

A basin measure puts weight ``delta`` on the points of a cycle and on its
entry set ``E = T^-1(cycle) minus cycle``, and ``delta * rho**k`` on a point
whose forward orbit reaches ``E`` after ``k >= 1`` steps.  Weights are
evaluated from forward hitting times; the inverse tree is never built.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .dynamics import DEFAULT_LIMITS, STEP_LIMIT, VALUE_BOUND, Cycle, Limits
from .hopf import CheckResult, DISSIPATIVE1, HopfReport, UNRESOLVED_STEPS, UNRESOLVED_VALUE
from .inverse_tree import DEFAULT_DEPTH_CAP, DEFAULT_MAX_ELEMENTS, DepthCapExceeded, expand, preimage
from .mapmodel import BranchMap

QUARTER = Fraction(1, 4)


class NotInBasin(ValueError):
    pass


class UnresolvedPoint(ValueError):
    def __init__(self, n: int, reason: str):
        self.n = n
        self.reason = reason
        super().__init__(f"{n} is unresolved under the limits ({reason})")


class _DepthOracle:
    """Memoized forward hitting times to a union of per-basin target sets."""

    def __init__(self, bmap: BranchMap, targets: dict[int, int], limits: Limits):
        self.map = bmap
        self.targets = targets
        self.limits = limits
        self._cache: dict[int, tuple[int, int]] = {}

    def locate(self, n: int) -> tuple[int, int]:
        """``(basin index, steps to the basin's cycle-or-entry set)``."""
        hit = self._cache.get(n)
        if hit is not None:
            return hit
        lim = self.limits
        targets, cache = self.targets, self._cache
        path, seen = [], set()
        x = n
        for step in range(lim.max_steps + 1):
            if x > lim.max_value:
                raise UnresolvedPoint(n, VALUE_BOUND)
            j = targets.get(x)
            if j is not None:
                basin, k = j, step
                break
            c = cache.get(x)
            if c is not None:
                basin, k = c[0], step + c[1]
                break
            if x in seen:
                raise NotInBasin(f"{n} enters a cycle outside the measured basins")
            seen.add(x)
            path.append(x)
            x = self.map(x)
        else:
            raise UnresolvedPoint(n, STEP_LIMIT)
        if k > lim.max_steps:
            raise UnresolvedPoint(n, STEP_LIMIT)
        for i, v in enumerate(path):
            cache[v] = (basin, k - i)
        return basin, k


def _check_params(delta, rho):
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")


@dataclass(frozen=True)
class BasinMeasure:
    map: BranchMap
    cycle: Cycle
    entries: frozenset
    delta: Fraction = Fraction(1)
    rho: Fraction = QUARTER
    limits: Limits = DEFAULT_LIMITS
    _oracle: _DepthOracle = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "rho", Fraction(self.rho))
        _check_params(self.delta, self.rho)
        targets = dict.fromkeys(self.cycle.elements, 0)
        targets.update(dict.fromkeys(self.entries, 0))
        object.__setattr__(self, "_oracle", _DepthOracle(self.map, targets, self.limits))

    @classmethod
    def build(cls, bmap: BranchMap, cycle: Cycle, delta=1, rho=QUARTER,
              limits: Limits = DEFAULT_LIMITS) -> "BasinMeasure":
        entries = preimage(bmap, cycle.elements) - set(cycle.elements)
        return cls(bmap, cycle, frozenset(entries), Fraction(delta), Fraction(rho), limits)

    @property
    def basins(self) -> tuple["BasinMeasure", ...]:
        return (self,)

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return (Fraction(1),)

    def locate(self, n: int) -> tuple[int, int]:
        return self._oracle.locate(n)

    def depth(self, n: int) -> int:
        return self.locate(n)[1]

    def weight(self, n: int) -> Fraction:
        return self.delta * self.rho ** self.depth(n)

    def describe(self) -> dict:
        return {"kind": "basin", "map": self.map.render(), "cycle": list(self.cycle.elements),
                "entries": sorted(self.entries), "delta": fmt(self.delta), "rho": fmt(self.rho)}


@dataclass(frozen=True)
class CombinedMeasure:
    """``sum_j 2^-j nu_j`` over basins ordered by cycle minimum (``j = 1, 2, ...``)."""

    basins: tuple[BasinMeasure, ...]
    _oracle: _DepthOracle = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.basins:
            raise ValueError("a combined measure needs at least one basin")
        targets = {}
        for j, bm in enumerate(self.basins):
            for x in (*bm.cycle.elements, *bm.entries):
                targets[x] = j
        b0 = self.basins[0]
        object.__setattr__(self, "_oracle", _DepthOracle(b0.map, targets, b0.limits))

    @property
    def map(self) -> BranchMap:
        return self.basins[0].map

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(1, 2 ** (j + 1)) for j in range(len(self.basins)))

    def locate(self, n: int) -> tuple[int, int]:
        return self._oracle.locate(n)

    def weight(self, n: int) -> Fraction:
        j, k = self.locate(n)
        bm = self.basins[j]
        return Fraction(1, 2 ** (j + 1)) * bm.delta * bm.rho ** k

    def describe(self) -> dict:
        return {"kind": "combined", "map": self.map.render(),
                "coefficients": [fmt(c) for c in self.coefficients],
                "basins": [bm.describe() for bm in self.basins]}


Measure = BasinMeasure | CombinedMeasure


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def alpha_weight(m: Measure, n: int) -> Fraction:
    return m.weight(n)


def measure_of(m: Measure, A: Iterable[int]) -> Fraction:
    return sum((m.weight(n) for n in set(A)), Fraction(0))


def combine_basins(report: HopfReport, delta=1, rho=QUARTER, limits: Limits | None = None) -> CombinedMeasure:
    if not report.cycles:
        raise ValueError("report has no cycles, so there is no basin to build a measure on")
    limits = limits or report.limits
    return CombinedMeasure(tuple(BasinMeasure.build(report.map, c, delta, rho, limits)
                                 for c in report.cycles))


@dataclass(frozen=True)
class PowerBoundResult:
    A: tuple[int, ...]
    n_max: int
    alpha_A: Fraction
    ratios: tuple[Fraction, ...]

    @property
    def max_ratio(self) -> Fraction:
        return max(self.ratios)

    @property
    def argmax(self) -> int:
        return self.ratios.index(self.max_ratio) + 1

    def to_dict(self) -> dict:
        return {"A": list(self.A), "n_max": self.n_max, "alpha_A": fmt(self.alpha_A),
                "ratios": [fmt(r) for r in self.ratios], "max_ratio": fmt(self.max_ratio),
                "max_ratio_float": float(self.max_ratio), "witness_n": self.argmax}


def preimage_masses(m: Measure, A: Iterable[int], n_max: int,
                    max_elements: int = DEFAULT_MAX_ELEMENTS) -> list[Fraction]:
    """``[alpha(T^-n A) for n in 1..n_max]``.

    Levels are expanded as arrays.  Each element carries its basin and its
    depth below the entry set, so its weight is known without another orbit:
    a predecessor of a cycle point has depth 0, any other predecessor is one
    deeper than its image.
    """
    if n_max > DEFAULT_DEPTH_CAP:
        raise DepthCapExceeded(f"n_max {n_max} exceeds depth cap {DEFAULT_DEPTH_CAP}")
    bmap = m.map
    roots = sorted(set(A))
    located = [m.locate(a) for a in roots]
    cyc_sets = [frozenset(bm.cycle.elements) for bm in m.basins]
    cyc_all = frozenset().union(*cyc_sets)
    vals = np.array(roots, dtype=object if roots and roots[-1] >= 2**62 else np.int64)
    basin = np.array([j for j, _ in located], np.int64)
    depth = np.array([k for _, k in located], np.int64)
    on_cycle = np.array([a in cyc_sets[j] for a, (j, _) in zip(roots, located)], bool)
    weights = [(bm.delta, bm.rho, c) for bm, c in zip(m.basins, m.coefficients)]
    out = []
    for _ in range(n_max):
        preds, parent = expand(bmap, vals)
        if preds.size > max_elements:
            raise DepthCapExceeded(f"preimage level has {preds.size} elements (> {max_elements})")
        pc = on_cycle[parent]
        new_cycle = np.zeros(preds.size, bool)
        for i in np.flatnonzero(pc).tolist():
            new_cycle[i] = int(preds[i]) in cyc_all
        depth = np.where(pc, 0, depth[parent] + 1)
        basin = basin[parent]
        vals, on_cycle = preds, new_cycle
        out.append(_mass(basin, depth, weights))
    return out


def _mass(basin, depth, weights) -> Fraction:
    if basin.size == 0:
        return Fraction(0)
    key = basin * (int(depth.max()) + 1) + depth
    uniq, counts = np.unique(key, return_counts=True)
    span = int(depth.max()) + 1
    total = Fraction(0)
    for u, c in zip(uniq.tolist(), counts.tolist()):
        j, k = divmod(u, span)
        delta, rho, coef = weights[j]
        total += c * coef * delta * rho ** k
    return total


def power_bound_ratio(m: Measure, A: Iterable[int], n_max: int) -> PowerBoundResult:
    """Exact ``alpha(T^-n A) / alpha(A)`` for ``n = 1..n_max`` with its maximum."""
    A = tuple(sorted(set(A)))
    alpha_A = measure_of(m, A)
    if alpha_A <= 0:
        raise ValueError("alpha(A) must be positive")
    ratios = tuple(x / alpha_A for x in preimage_masses(m, A, n_max))
    return PowerBoundResult(A, n_max, alpha_A, ratios)


def delta_measure(report: HopfReport, A: Iterable[int]) -> Fraction:
    """Counting measure restricted to the union of the found cycles."""
    members = report.cycle_members
    return Fraction(sum(1 for a in set(A) if a in members))


@dataclass(frozen=True)
class Beta:
    """A finite weight function on the positive integers with a computable tail."""

    weight: Callable[[int], Fraction]
    tail: Callable[[int], Fraction]
    name: str = "custom"


GEOMETRIC_BETA = Beta(lambda n: Fraction(1, 2 ** n), lambda N: Fraction(1, 2 ** N), "geometric")


def _beta_mass(beta: Beta, points: np.ndarray, N: int) -> Fraction:
    if points.size == 0:
        return Fraction(0)
    if beta is GEOMETRIC_BETA:
        # sum of 2^-n over a set of n <= N, as an integer bit pattern over 2^N
        bits = np.zeros(N + 1, np.uint8)
        bits[N - points] = 1
        num = int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
        return Fraction(num, 2 ** N)
    return sum((Fraction(beta.weight(int(n))) for n in points), Fraction(0))


@dataclass(frozen=True)
class GammaEnclosure:
    lower: Fraction
    upper: Fraction

    def __contains__(self, q) -> bool:
        return self.lower <= q <= self.upper

    def __iter__(self):
        return iter((self.lower, self.upper))


def cycle_fractions(report: HopfReport, A: Iterable[int]) -> list[Fraction]:
    """``#(A & C_i) / #C_i`` for each found cycle ``C_i``."""
    A = set(A)
    return [Fraction(len(A & set(c.elements)), c.length) for c in report.cycles]


def gamma_measure(report: HopfReport, A: Iterable[int], N: int | None = None,
                  beta: Beta = GEOMETRIC_BETA) -> GammaEnclosure:
    """Enclosure of ``gamma(A) = sum_i beta(F_i) #(A & C_i)/#C_i``.

    ``F_i`` is the basin of cycle ``C_i``.  The lower end uses the basin points
    inside ``[1, N]``.  Mass that might still belong to some basin (the tail
    beyond ``N`` and window points left unresolved) can go to at most one
    basin per point, so the upper end adds it once, scaled by the largest
    cycle fraction.
    """
    N = report.N if N is None else N
    if not 1 <= N <= report.N:
        raise ValueError(f"truncation {N} must lie in [1, {report.N}]")
    fr = cycle_fractions(report, A)
    cls = report.cls[: N + 1]
    lower = Fraction(0)
    for i, f in enumerate(fr):
        if f:
            pts = np.flatnonzero((cls <= DISSIPATIVE1) & (report.cycle_index[: N + 1] == i))
            pts = pts[pts >= 1]
            lower += _beta_mass(beta, pts, N) * f
    unres = np.flatnonzero((cls == UNRESOLVED_STEPS) | (cls == UNRESOLVED_VALUE))
    unres = unres[unres >= 1]
    slack = Fraction(beta.tail(N)) + _beta_mass(beta, unres, N)
    return GammaEnclosure(lower, lower + slack * max(fr, default=Fraction(0)))


def gamma_invariance_check(report: HopfReport, A: Iterable[int]) -> CheckResult:
    """``#(T^-1(A) & C_i) == #(A & C_i)`` for every found cycle."""
    A = set(A)
    pre = preimage(report.map, A)
    for c in report.cycles:
        s = set(c.elements)
        before, after = len(A & s), len(pre & s)
        if before != after:
            return CheckResult(False, c.minimum,
                               f"cycle {c.minimum}: #(A & C) = {before} but #(T^-1 A & C) = {after}",
                               checked=len(report.cycles))
    return CheckResult(True, checked=len(report.cycles))


def recursive_weights(m: BasinMeasure, depth: int) -> dict[int, Fraction]:
    """Weights built top-down along the inverse tree, for cross-checking ``weight``.

    Cycle and entry points get ``delta``; every other predecessor gets ``rho``
    times the weight of its image.
    """
    from .inverse_tree import predecessors
    cyc = set(m.cycle.elements)
    w = {x: m.delta for x in cyc}
    frontier = list(m.entries)
    for e in frontier:
        w[e] = m.delta
    for _ in range(depth):
        nxt = []
        for n in frontier:
            for p in predecessors(m.map, n):
                w[p] = m.rho * w[n]
                nxt.append(p)
        frontier = nxt
    return w


def sample_sets(rng, count: int, universe: int = 10**4,
                sizes: Sequence[int] = (1, 2, 5, 20)) -> list[tuple[int, ...]]:
    """``count`` uniform subsets of ``[1, universe]``, sizes cycling through ``sizes``."""
    return [tuple(sorted(rng.sample(range(1, universe + 1), sizes[i % len(sizes)])))
            for i in range(count)]
