"""Window-scan timing: numba kernel vs the same kernel as plain Python.

    python3 benchmarks/bench_scan.py --sizes 10000,100000 --repeat 3

Both paths call ``scan_window`` with identical arguments and the outputs are
compared before any timing is reported.
"""
import argparse
import time

import numpy as np

from collatz_ergodic import BUILTIN_MAPS, _kernels
from collatz_ergodic._accel import NUMBA_ENABLED


def _args(bmap, N, max_steps):
    a = np.array([br.a for br in bmap.branches], np.int64)
    b = np.array([br.b for br in bmap.branches], np.int64)
    d = np.array([br.d for br in bmap.branches], np.int64)
    cap = _kernels.safe_cap(bmap.max_a, bmap.max_abs_b)
    return a, b, d, N, max_steps, cap


def _best(fn, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--map", default="collatz-t", choices=sorted(BUILTIN_MAPS))
    p.add_argument("--sizes", default="10000,100000")
    p.add_argument("--steps", type=int, default=10**4)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    bmap = BUILTIN_MAPS[args.map]
    fast = _kernels.scan_window
    slow = _kernels.scan_window.py_func
    if NUMBA_ENABLED:
        fast(*_args(bmap, 10, args.steps))  # compile outside the timed region
    else:
        print("numba disabled: both columns run the Python kernel")
    print(f"{'N':>10} {'numba s':>10} {'python s':>10} {'speedup':>8}")
    for N in (int(s) for s in args.sizes.split(",")):
        kargs = _args(bmap, N, args.steps)
        tf, of = _best(fast, kargs, args.repeat)
        ts, os_ = _best(slow, kargs, 1)
        if not all(np.array_equal(x, y) for x, y in zip(of, os_)):
            raise SystemExit(f"kernel outputs differ at N={N}")
        print(f"{N:>10} {tf:>10.4f} {ts:>10.4f} {ts / tf:>7.1f}x")


if __name__ == "__main__":
    main()
