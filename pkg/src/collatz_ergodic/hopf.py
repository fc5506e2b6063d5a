"""Finite-window Hopf decomposition of ``[1, N]``.

Every start value is classified as Conservative (a cycle member),
Dissipative1 (reaches a cycle after ``k >= 1`` steps) or Unresolved (the
step or value limit ran out first).  Unresolved is always relative to the
limits stored on the report.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from . import _kernels
from .dynamics import (DEFAULT_LIMITS, STEP_LIMIT, VALUE_BOUND, Cycle, EnteredCycle, Limits,
                       ValueBound, orbit)
from .mapmodel import BranchMap

CONSERVATIVE = 0
DISSIPATIVE1 = 1
UNRESOLVED_STEPS = 2
UNRESOLVED_VALUE = 3

CLASS_NAMES = {CONSERVATIVE: "C", DISSIPATIVE1: "D1",
               UNRESOLVED_STEPS: "U", UNRESOLVED_VALUE: "U"}


@dataclass(frozen=True)
class Conservative:
    cycle_id: int


@dataclass(frozen=True)
class Dissipative1:
    cycle_id: int
    hitting_time: int


@dataclass(frozen=True)
class Unresolved:
    reason: str


Classification = Union[Conservative, Dissipative1, Unresolved]


@dataclass
class HopfReport:
    """Classification of every point in ``1..N``.

    ``cls``, ``cycle_index`` and ``hit`` are arrays of length ``N + 1``
    (index 0 unused).  ``cycle_index`` points into ``cycles``, which is sorted
    by minimal element; ``hit`` is the hitting time of the cycle (0 on it).
    """

    map: BranchMap
    N: int
    limits: Limits
    cycles: tuple[Cycle, ...]
    cls: np.ndarray
    cycle_index: np.ndarray
    hit: np.ndarray
    method: str = "kernel"
    _members: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self._members = {x: i for i, c in enumerate(self.cycles) for x in c.elements}

    @property
    def cycle_members(self) -> dict[int, int]:
        """Every element of every found cycle (also those above ``N``) -> cycle index."""
        return self._members

    @property
    def conservative_set(self) -> frozenset:
        return frozenset(self._members)

    def counts(self) -> dict[str, int]:
        bc = np.bincount(self.cls[1:], minlength=4)
        return {"C": int(bc[CONSERVATIVE]), "D1": int(bc[DISSIPATIVE1]),
                "U": int(bc[UNRESOLVED_STEPS] + bc[UNRESOLVED_VALUE]),
                "U_step_limit": int(bc[UNRESOLVED_STEPS]),
                "U_value_bound": int(bc[UNRESOLVED_VALUE])}

    def classification(self, n: int) -> Classification:
        if not 1 <= n <= self.N:
            raise IndexError(f"{n} is outside the window [1, {self.N}]")
        c = self.cls[n]
        if c == CONSERVATIVE:
            return Conservative(self.cycles[self.cycle_index[n]].minimum)
        if c == DISSIPATIVE1:
            return Dissipative1(self.cycles[self.cycle_index[n]].minimum, int(self.hit[n]))
        return Unresolved(STEP_LIMIT if c == UNRESOLVED_STEPS else VALUE_BOUND)

    def points(self, cls_code: int) -> np.ndarray:
        return np.flatnonzero(self.cls == cls_code)

    def resolve(self, n: int) -> tuple[int, int] | None:
        """``(cycle index, hitting time)`` of any ``n >= 1``, or None if unresolved.

        Agrees with ``orbit(map, n, limits)``.  Points above ``N`` are walked
        forward until they meet the window or a known cycle; anything the
        window cannot settle falls back to a full orbit.
        """
        if 1 <= n <= self.N:
            if self.cls[n] <= DISSIPATIVE1:
                return int(self.cycle_index[n]), int(self.hit[n])
            return None
        lim = self.limits
        members = self._members
        x = n
        seen = set()
        for step in range(lim.max_steps + 1):
            if x > lim.max_value:
                return None
            ci = members.get(x)
            if ci is not None:
                if step + self.cycles[ci].length <= lim.max_steps:
                    return ci, step
                return None
            if x <= self.N:
                c = self.cls[x]
                if c == DISSIPATIVE1:
                    ci = int(self.cycle_index[x])
                    k = step + int(self.hit[x])
                    return (ci, k) if k + self.cycles[ci].length <= lim.max_steps else None
                if c == UNRESOLVED_STEPS:
                    return None
                break
            if x in seen:
                break
            seen.add(x)
            x = self.map(x)
        else:
            return None
        out = orbit(self.map, n, lim).outcome
        if isinstance(out, EnteredCycle):
            ci = self._index_of(out.cycle)
            if ci is not None:
                return ci, out.hitting_time
            raise LookupError(f"{n} enters cycle {out.cycle.elements[:8]} which is not in the report")
        return None

    def _index_of(self, cycle: Cycle) -> int | None:
        ci = self._members.get(cycle.minimum)
        return ci

    def basin_cycle(self, n: int) -> Cycle | None:
        r = self.resolve(n)
        return None if r is None else self.cycles[r[0]]

    def to_dict(self, include_points: bool = False) -> dict:
        out = {
            "map": self.map.render(),
            "map_name": self.map.name,
            "window": self.N,
            "limits": self.limits.to_dict(),
            "method": self.method,
            "cycles": [{"min": c.minimum, "length": c.length, "elements": list(c.elements)}
                       for c in self.cycles],
            "counts": self.counts(),
        }
        if include_points:
            out["points"] = [list(row) for row in self.rows()]
        return out

    def rows(self):
        """``(n, class, cycle_min, hitting_time)`` per point; blanks for Unresolved."""
        mins = [c.minimum for c in self.cycles]
        cls, ci, hit = self.cls.tolist(), self.cycle_index.tolist(), self.hit.tolist()
        for n in range(1, self.N + 1):
            c = cls[n]
            if c <= DISSIPATIVE1:
                yield n, CLASS_NAMES[c], mins[ci[n]], hit[n]
            else:
                yield n, "U:" + (STEP_LIMIT if c == UNRESOLVED_STEPS else VALUE_BOUND), "", ""


def _cycle_from_min(bmap: BranchMap, lo: int, length: int) -> Cycle:
    el = [lo]
    x = bmap(lo)
    while x != lo:
        el.append(x)
        x = bmap(x)
    assert len(el) == length
    return Cycle(tuple(el))


def _kernel_usable(bmap: BranchMap, N: int) -> bool:
    return (bmap.max_abs_b < 2**62 and bmap.max_a < 2**31 and bmap.max_d < 2**62
            and _kernels.safe_cap(bmap.max_a, bmap.max_abs_b) > 2 * N)


def classify_window(bmap: BranchMap, N: int, limits: Limits = DEFAULT_LIMITS,
                    method: str = "auto") -> HopfReport:
    """Classify ``1..N``.

    ``method="kernel"`` runs the memoized int64 scan (numba when enabled);
    ``"exact"`` runs an independent big-int orbit per point.  ``"auto"`` picks
    the kernel whenever the map's coefficients fit int64.
    """
    if N < 1:
        raise ValueError(f"window size must be >= 1, got {N}")
    if method == "auto":
        method = "kernel" if _kernel_usable(bmap, N) else "exact"
    if method == "kernel":
        return _classify_kernel(bmap, N, limits)
    if method == "exact":
        return _classify_exact(bmap, N, limits)
    raise ValueError(f"unknown method {method!r}")


def _assemble(bmap, N, limits, cls, hit, cid, cycle_list, method):
    """Sort cycles by minimum and rewrite ``cid`` (indices into ``cycle_list``)."""
    uniq = {}
    for c in cycle_list:
        uniq.setdefault(c.minimum, c)
    ordered = tuple(uniq[k] for k in sorted(uniq))
    pos = {c.minimum: i for i, c in enumerate(ordered)}
    remap = np.array([pos[c.minimum] for c in cycle_list] + [-1], np.int64)
    ci = remap[cid]
    return HopfReport(bmap, N, limits, ordered, cls, ci, hit, method)


def _classify_exact(bmap, N, limits):
    cls = np.full(N + 1, UNRESOLVED_STEPS, np.int8)
    hit = np.full(N + 1, -1, np.int64)
    cid = np.full(N + 1, -1, np.int64)
    cycle_list, known = [], {}
    for n in range(1, N + 1):
        out = orbit(bmap, n, limits).outcome
        if isinstance(out, EnteredCycle):
            cls[n] = CONSERVATIVE if out.hitting_time == 0 else DISSIPATIVE1
            hit[n] = out.hitting_time
            key = out.cycle.minimum
            if key not in known:
                known[key] = len(cycle_list)
                cycle_list.append(out.cycle)
            cid[n] = known[key]
        elif isinstance(out, ValueBound):
            cls[n] = UNRESOLVED_VALUE
    return _assemble(bmap, N, limits, cls, hit, cid, cycle_list, "exact")


def _classify_kernel(bmap, N, limits, cap=None):
    """``cap`` lowers the int64 escape threshold (tests use it to force the big-int path)."""
    a = np.array([br.a for br in bmap.branches], np.int64)
    b = np.array([br.b for br in bmap.branches], np.int64)
    d = np.array([br.d for br in bmap.branches], np.int64)
    cap = min(limits.max_value, _kernels.safe_cap(bmap.max_a, bmap.max_abs_b), cap or limits.max_value)
    kind, kval, cyc, cmin, clen = _kernels.scan_window(a, b, d, N, limits.max_steps, cap)

    cls = np.full(N + 1, UNRESOLVED_STEPS, np.int8)
    hit = np.full(N + 1, -1, np.int64)
    cid = np.full(N + 1, -1, np.int64)
    res = kind == _kernels.RESOLVED
    lens = np.zeros(N + 1, np.int64)
    lens[res] = clen[cyc[res]]
    ok = res & (kval + lens <= limits.max_steps)
    cls[ok & (kval == 0)] = CONSERVATIVE
    cls[ok & (kval > 0)] = DISSIPATIVE1
    hit[ok] = kval[ok]
    cid[ok] = cyc[ok]
    exc = (kind == _kernels.EXCEEDED) & (kval <= limits.max_steps)
    exc[0] = False
    escaped = []
    if cap >= limits.max_value:
        cls[exc] = UNRESOLVED_VALUE
    else:
        escaped = np.flatnonzero(exc).tolist()

    cycle_list = [_cycle_from_min(bmap, int(lo), int(ln)) for lo, ln in zip(cmin, clen)]
    # kernel overflow escapes are redone with python ints
    for n in escaped:
        out = orbit(bmap, n, limits).outcome
        if isinstance(out, EnteredCycle):
            cls[n] = CONSERVATIVE if out.hitting_time == 0 else DISSIPATIVE1
            hit[n] = out.hitting_time
            cid[n] = len(cycle_list)
            cycle_list.append(out.cycle)
        elif isinstance(out, ValueBound):
            cls[n] = UNRESOLVED_VALUE
    used = sorted(set(np.unique(cid[cid >= 0]).tolist()))
    keep = {k: i for i, k in enumerate(used)}
    if len(used) != len(cycle_list):
        remap = np.full(len(cycle_list) + 1, -1, np.int64)
        for k, i in keep.items():
            remap[k] = i
        cid = remap[cid]
        cycle_list = [cycle_list[k] for k in used]
    return _assemble(bmap, N, limits, cls, hit, cid, cycle_list, "kernel")


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    witness: int | None = None
    detail: str = ""
    checked: int = 0
    skipped: int = 0

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"passed": self.passed, "witness": self.witness, "detail": self.detail,
                "checked": self.checked, "skipped": self.skipped}


def check_absorbing(bmap: BranchMap, report: HopfReport) -> CheckResult:
    """Every Conservative point maps to a Conservative point of the same cycle,
    and every found cycle lies wholly in C (within the window)."""
    members = report.cycle_members
    checked = 0
    for ci, c in enumerate(report.cycles):
        for x in c.elements:
            if x <= report.N and (report.cls[x] != CONSERVATIVE or report.cycle_index[x] != ci):
                return CheckResult(False, x, f"cycle element {x} is not Conservative", checked)
    for n in report.points(CONSERVATIVE).tolist():
        checked += 1
        ci = int(report.cycle_index[n])
        m = bmap(n)
        if members.get(m) != ci or members.get(n) != ci:
            return CheckResult(False, n, f"T({n}) = {m} leaves cycle {ci}", checked)
        if m <= report.N and (report.cls[m] != CONSERVATIVE or report.cycle_index[m] != ci):
            return CheckResult(False, n, f"T({n}) = {m} is not classified Conservative", checked)
    return CheckResult(True, checked=checked)


def _successors(bmap: BranchMap, N: int) -> np.ndarray:
    n = np.arange(N + 1, dtype=np.int64)
    if bmap.max_a * (N + 1) + bmap.max_abs_b >= 2**62:
        n = n.astype(object)
    out = np.zeros(N + 1, dtype=n.dtype)
    m = bmap.modulus
    for r, (a, b, d) in enumerate(bmap.branches):
        sel = n % m == r
        out[sel] = (a * n[sel] + b) // d
    return out


def check_basin_invariance(bmap: BranchMap, report: HopfReport) -> CheckResult:
    """Finitary form of ``T^-1(C u D1) = C u D1``.

    For each resolved ``n`` with resolved successor ``m = T(n)``: both lie in
    the same basin, and ``hit(n) = hit(m) + 1`` unless ``n`` is a cycle point
    (then ``m`` is on the same cycle).  Pairs whose successor is unresolved,
    and unresolved ``n``, are skipped and counted.
    """
    N = report.N
    succ = _successors(bmap, N)
    resolved = report.cls <= DISSIPATIVE1
    resolved[0] = False
    idx = np.flatnonzero(resolved)
    s = succ[idx]
    inside = np.asarray(s <= N, dtype=bool)
    skipped = N - idx.size

    ni, si = idx[inside], s[inside].astype(np.int64)
    s_res = report.cls[si] <= DISSIPATIVE1
    skipped += int((~s_res).sum())
    ni, si = ni[s_res], si[s_res]
    bad = report.cycle_index[ni] != report.cycle_index[si]
    is_c = report.cls[ni] == CONSERVATIVE
    bad |= is_c & (report.cls[si] != CONSERVATIVE)
    bad |= ~is_c & (report.hit[ni] != report.hit[si] + 1)
    checked = int(ni.size)
    if bad.any():
        w = int(ni[np.argmax(bad)])
        return CheckResult(False, w, f"{w} -> {bmap(w)} crosses basins or breaks hitting times",
                           checked, skipped)

    for n, m in zip(idx[~inside].tolist(), s[~inside].tolist()):
        r = report.resolve(int(m))
        if r is None:
            skipped += 1
            continue
        checked += 1
        ci, k = int(report.cycle_index[n]), int(report.hit[n])
        if r[0] != ci or (k == 0 and r[1] != 0) or (k > 0 and r[1] != k - 1):
            return CheckResult(False, n, f"{n} -> {m} crosses basins or breaks hitting times",
                               checked, skipped)
    return CheckResult(True, checked=checked, skipped=skipped)


def classes_of(report: HopfReport, A: Iterable[int]) -> dict[int, Classification]:
    return {n: report.classification(n) for n in A}
