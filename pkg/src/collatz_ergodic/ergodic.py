"""Cesaro averages along orbits and their exact limits.

Averages are ``(1/N) * sum_{n=1..N} f(T^n x)``; the start point itself is
not counted.  For a point that enters a cycle, the orbit is eventually
periodic and the sum has a closed form in terms of the preperiod ``k`` and
period ``L``, so ``N`` can be arbitrarily large.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .dynamics import DEFAULT_LIMITS, EnteredCycle, Limits, orbit
from .hopf import HopfReport
from .mapmodel import BranchMap
from .measures import UnresolvedPoint

ZERO = Fraction(0)


class UnresolvedOrbit(ValueError):
    pass


@dataclass(frozen=True)
class FiniteSupportFunction:
    values: Mapping[int, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "values",
                           {int(k): Fraction(v) for k, v in dict(self.values).items() if v != 0})

    @classmethod
    def indicator(cls, A: Iterable[int]) -> "FiniteSupportFunction":
        return cls(dict.fromkeys(A, Fraction(1)))

    @property
    def support(self) -> frozenset:
        return frozenset(self.values)

    def __call__(self, n: int) -> Fraction:
        return self.values.get(n, ZERO)

    def __hash__(self):
        return hash(frozenset(self.values.items()))


@dataclass(frozen=True)
class Decomposition:
    """Eventually periodic orbit: ``prefix = (x, ..., T^{k-1} x)`` then ``cycle`` repeating."""

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    @property
    def preperiod(self) -> int:
        return len(self.prefix)

    @property
    def period(self) -> int:
        return len(self.cycle)

    def error_constant(self) -> int:
        """``k + 2L``: ``N`` times this bounds the distance of an average from its limit."""
        return self.preperiod + 2 * self.period


@lru_cache(maxsize=4096)
def decompose(bmap: BranchMap, x: int, limits: Limits = DEFAULT_LIMITS) -> Decomposition:
    out = orbit(bmap, x, limits).outcome
    if not isinstance(out, EnteredCycle):
        raise UnresolvedOrbit(f"orbit of {x} does not close a cycle under {limits}")
    k = out.hitting_time
    prefix = [x]
    y = x
    for _ in range(k):
        y = bmap(y)
        prefix.append(y)
    entry = prefix.pop()
    cyc = [entry]
    y = bmap(entry)
    while y != entry:
        cyc.append(y)
        y = bmap(y)
    return Decomposition(tuple(prefix), tuple(cyc))


@lru_cache(maxsize=4096)
def _positions(dec: Decomposition):
    return ({v: t for t, v in enumerate(dec.prefix)},
            {v: o for o, v in enumerate(dec.cycle)})


def _closed_sum(dec: Decomposition, f: FiniteSupportFunction, N: int) -> Fraction:
    pre, cyc = _positions(dec)
    k, L = dec.preperiod, dec.period
    total = ZERO
    for v, w in f.values.items():
        t = pre.get(v)
        if t is not None:
            if 1 <= t <= N:
                total += w
            continue
        o = cyc.get(v)
        if o is None:
            continue
        first = k + o if k + o >= 1 else L
        if first <= N:
            total += w * ((N - first) // L + 1)
    return total


def _direct_sum(bmap: BranchMap, f: FiniteSupportFunction, x: int, N: int, limits: Limits) -> Fraction:
    if N > limits.max_steps:
        raise UnresolvedOrbit(f"{N} steps exceed the step limit {limits.max_steps}")
    total = ZERO
    for _ in range(N):
        x = bmap(x)
        if x > limits.max_value:
            raise UnresolvedOrbit(f"iterate {x} exceeds the value limit")
        total += f(x)
    return total


def cesaro_average(bmap: BranchMap, f: FiniteSupportFunction, x: int, N: int,
                   limits: Limits = DEFAULT_LIMITS, method: str = "closed") -> Fraction:
    """Exact ``(1/N) sum_{n=1}^{N} f(T^n x)``.

    ``method="closed"`` uses the preperiod/period decomposition (falls back to
    iteration when the orbit does not close under the limits);
    ``method="direct"`` iterates N times and is kept as an independent check.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if method == "direct":
        return _direct_sum(bmap, f, x, N, limits) / N
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    try:
        dec = decompose(bmap, x, limits)
    except UnresolvedOrbit:
        return _direct_sum(bmap, f, x, N, limits) / N
    return _closed_sum(dec, f, N) / N


def _resolve(report: HopfReport, n: int) -> int:
    r = report.resolve(n)
    if r is None:
        raise UnresolvedPoint(n, "not resolved in report")
    return r[0]


def f_star(report: HopfReport, A: Iterable[int], x: int) -> Fraction:
    """Pointwise limit of the averages of ``1_A``: ``#(A & C_i)/#C_i`` on the basin of ``C_i``."""
    c = report.cycles[_resolve(report, x)]
    A = set(A)
    return Fraction(sum(1 for e in c.elements if e in A), c.length)


def amb_case(report: HopfReport, y: int, a: int) -> str:
    """Which row of the (y, a) case table applies: ``"DxD"``, ``"D1xC"`` or ``"CxC"``,
    suffixed ``":same"``/``":other"`` for whether ``a`` lies on ``y``'s cycle."""
    cy = _resolve(report, y)
    _resolve(report, a)
    ca = report.cycle_members.get(a)
    if ca is None:
        return "DxD" if y not in report.cycle_members else "CxD"
    head = "CxC" if y in report.cycle_members else "D1xC"
    return head + (":same" if ca == cy else ":other")


def amb_case_limit(report: HopfReport, y: int, a: int) -> Fraction:
    """Exact ``lim (1/N) sum 1_{a}(T^n y)``."""
    cy = _resolve(report, y)
    _resolve(report, a)
    ca = report.cycle_members.get(a)
    if ca is None or ca != cy:
        return ZERO
    return Fraction(1, report.cycles[ca].length)


@dataclass(frozen=True)
class AMBCheck:
    empirical: Fraction
    exact_limit: Fraction
    error_bound: Fraction
    bound_ok: bool
    per_point_limits: tuple[Fraction, ...] = ()

    def to_dict(self) -> dict:
        f = lambda q: f"{q.numerator}/{q.denominator}"
        return {"empirical": f(self.empirical), "exact_limit": f(self.exact_limit),
                "error_bound": f(self.error_bound), "bound_ok": self.bound_ok}


def amb_empirical_check(report: HopfReport, Y: Iterable[int], A: Iterable[int], N: int,
                        method: str = "closed", M: int = 1) -> AMBCheck:
    """Compare summed averages of ``1_A`` over start points ``Y`` with their limit.

    ``bound_ok`` holds when each start point's limit is at most ``M * #A`` and
    the empirical sum lies within ``sum_y (k_y + 2 L_y) / N`` of the limit.
    """
    Y, A = sorted(set(Y)), sorted(set(A))
    bmap, lim = report.map, report.limits
    f = FiniteSupportFunction.indicator(A)
    emp = exact = slack = ZERO
    per_y = []
    for y in Y:
        lim_y = sum((amb_case_limit(report, y, a) for a in A), ZERO)
        per_y.append(lim_y)
        exact += lim_y
        emp += cesaro_average(bmap, f, y, N, lim, method)
        slack += Fraction(decompose(bmap, y, lim).error_constant(), N)
    ok = all(v <= M * len(A) for v in per_y) and abs(emp - exact) <= slack
    return AMBCheck(emp, exact, slack, ok, tuple(per_y))


def grid_rows(report: HopfReport, ys: Iterable[int], as_: Iterable[int], Ns: Iterable[int]):
    """Rows ``(y, a, N, empirical, exact, bound, ok)`` for convergence plots."""
    bmap, lim = report.map, report.limits
    for y in ys:
        dec = decompose(bmap, y, lim)
        for a in as_:
            exact = amb_case_limit(report, y, a)
            f = FiniteSupportFunction.indicator([a])
            for N in Ns:
                emp = cesaro_average(bmap, f, y, N, lim)
                bound = Fraction(dec.error_constant(), N)
                yield y, a, N, emp, exact, bound, abs(emp - exact) <= bound
