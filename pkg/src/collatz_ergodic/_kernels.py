"""Hot loops over int64 arrays.

Everything here is written in the subset of Python that numba compiles, and
is also run verbatim when numba is disabled.
"""
import numpy as np

from ._accel import jit

UNKNOWN = 0
RESOLVED = 1
EXCEEDED = 2
_ON_PATH = 3

INT64_MAX = np.iinfo(np.int64).max


def safe_cap(max_a: int, max_abs_b: int) -> int:
    """Largest x for which ``a*x + b`` cannot overflow int64 on any branch."""
    if max_a == 0:
        return INT64_MAX - max_abs_b
    return (INT64_MAX - max_abs_b) // max_a


@jit
def scan_window(a, b, d, N, max_steps, cap):
    """Memoized forward scan of every start value in ``1..N``.

    Per point it records limit-independent facts:

    * ``kind == RESOLVED``: the orbit enters cycle ``cyc`` after ``kval`` steps
      without ever exceeding ``cap``;
    * ``kind == EXCEEDED``: the first iterate above ``cap`` occurs at step ``kval``;
    * ``kind == UNKNOWN``: neither was settled within ``max_steps`` steps.

    Whether a point counts as resolved under a step limit is decided by the
    caller from these facts (``kval + cycle_len <= max_steps``).  Cycles get ids
    in discovery order; ``cycle_min``/``cycle_len`` are indexed by id.
    """
    m = a.shape[0]
    kind = np.zeros(N + 1, np.int8)
    kval = np.zeros(N + 1, np.int64)
    cyc = np.full(N + 1, -1, np.int64)
    cycle_min = np.zeros(8, np.int64)
    cycle_len = np.zeros(8, np.int64)
    ncyc = 0
    big = dict()
    local = dict()
    big[np.int64(-1)] = np.int64(-1)
    local[np.int64(-1)] = np.int64(-1)
    path = np.zeros(max_steps + 1, np.int64)

    for n in range(1, N + 1):
        if kind[n] != UNKNOWN:
            continue
        x = np.int64(n)
        res_kind = UNKNOWN
        res_k = np.int64(0)
        res_c = np.int64(-1)
        new_start = np.int64(-1)
        steps = 0
        for step in range(max_steps + 1):
            steps = step
            if x > cap:
                res_kind = EXCEEDED
                res_k = step
                break
            if x <= N:
                kx = kind[x]
                if kx == RESOLVED:
                    res_kind = RESOLVED
                    res_k = step + kval[x]
                    res_c = cyc[x]
                    break
                if kx == EXCEEDED:
                    res_kind = EXCEEDED
                    res_k = step + kval[x]
                    break
                if kx == _ON_PATH:
                    new_start = kval[x]
                    break
                kind[x] = _ON_PATH
                kval[x] = step
            else:
                if x in big:
                    res_kind = RESOLVED
                    res_k = step
                    res_c = big[x]
                    break
                if x in local:
                    new_start = local[x]
                    break
                local[x] = np.int64(step)
            path[step] = x
            if step == max_steps:
                steps = step + 1
                break
            r = x % m
            x = (a[r] * x + b[r]) // d[r]

        if new_start >= 0:
            if ncyc == cycle_min.shape[0]:
                cycle_min = np.concatenate((cycle_min, np.zeros(ncyc, np.int64)))
                cycle_len = np.concatenate((cycle_len, np.zeros(ncyc, np.int64)))
            res_c = np.int64(ncyc)
            ncyc += 1
            lo = path[new_start]
            for i in range(new_start, steps):
                v = path[i]
                if v < lo:
                    lo = v
                if v <= N:
                    kind[v] = RESOLVED
                    kval[v] = 0
                    cyc[v] = res_c
                else:
                    big[v] = res_c
            cycle_min[res_c] = lo
            cycle_len[res_c] = steps - new_start
            res_kind = RESOLVED
            res_k = new_start

        if steps == 0:
            # n itself is above cap
            kind[n] = EXCEEDED
            kval[n] = 0
        top = steps if new_start < 0 else new_start
        for i in range(top):
            v = path[i]
            if v <= N:
                kind[v] = res_kind
                if res_kind == RESOLVED:
                    kval[v] = res_k - i
                    cyc[v] = res_c
                elif res_kind == EXCEEDED:
                    kval[v] = res_k - i
                else:
                    kval[v] = 0
        if len(local) > 1:
            local.clear()
            local[np.int64(-1)] = np.int64(-1)

    return kind, kval, cyc, cycle_min[:ncyc].copy(), cycle_len[:ncyc].copy()
