"""Command-line front end.

Exit codes: 0 success, 2 usage error or invalid map, 3 orbit limits
exhausted, 4 a verification check failed.  ``COLLATZ_ERGODIC_OUT`` overrides
``--out-dir``.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .dynamics import EnteredCycle, Limits, NotReached, StepLimit, hitting_time, orbit
from .ergodic import grid_rows
from .hopf import check_absorbing, check_basin_invariance, classify_window
from .inverse_tree import level, preimage
from .mapmodel import COLLATZ_T, MapSpecError, load_map
from .measures import (QUARTER, combine_basins, delta_measure, gamma_invariance_check,
                       power_bound_ratio, sample_sets)
from .reporting import envelope, ratio_str, write_csv, write_json

EXIT_USAGE = 2
EXIT_LIMITS = 3
EXIT_CHECK = 4

STRUCTURED_SETS = ((1,), (4,), (1, 2))


@dataclass
class RunConfig:
    command: str
    map: str
    map_spec: str
    limits: dict
    seed: int
    out_dir: str
    format: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _int_arg(text: str) -> int:
    text = text.strip()
    if "^" in text or "**" in text:
        base, exp = text.replace("**", "^").split("^")
        return int(base) ** int(exp)
    return int(text)


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return vals


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--map", default="collatz-t",
                   help="built-in map (collatz-t, collatz-s, 3n-minus-1) or a map-spec file")
    g.add_argument("--limits-steps", type=_int_arg, default=10**5)
    g.add_argument("--limits-value", type=_int_arg, default=2**256)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", default=".")
    g.add_argument("--format", choices=("json", "csv", "both"), default="both")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="collatz-ergodic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", parents=[common], help="iterate one start value")
    p.add_argument("n", type=int)
    p.add_argument("--show", type=int, default=200, help="max iterates to print")

    p = sub.add_parser("classify", parents=[common], help="Hopf classification of [1, N]")
    p.add_argument("-N", type=int, required=True, dest="window")
    p.add_argument("--points", action="store_true", help="include the per-point table in JSON")
    p.add_argument("--method", choices=("auto", "kernel", "exact"), default="auto")

    p = sub.add_parser("measure", parents=[common], help="power-bound and invariance sweeps")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--nmax", type=int, default=32)
    p.add_argument("-N", type=int, default=10**4, dest="window", help="sampling universe [1, N]")
    p.add_argument("--delta", type=_fraction_arg, default=Fraction(1))
    p.add_argument("--rho", type=_fraction_arg, default=QUARTER)
    p.add_argument("--structured", action="store_true",
                   help="also measure the sets {1}, {4}, {1,2}")

    p = sub.add_parser("averages", parents=[common], help="Cesaro averages vs exact limits")
    p.add_argument("--ys", type=_int_list, default=[3, 7, 27])
    p.add_argument("--as", type=_int_list, default=[1, 2], dest="as_")
    p.add_argument("--N", type=_int_list, default=[100, 1000, 10000], dest="Ns")

    p = sub.add_parser("tree", parents=[common], help="dump preimage levels")
    p.add_argument("--root", type=_int_list, default=[4])
    p.add_argument("--depth", type=int, default=8)

    p = sub.add_parser("report", parents=[common], help="compare or merge JSON reports")
    p.add_argument("action", choices=("compare", "merge"))
    p.add_argument("files", nargs="+")
    p.add_argument("--output", default="merged_measure_report.json")
    return parser


def _out_dir(args) -> Path:
    return Path(os.environ.get("COLLATZ_ERGODIC_OUT") or args.out_dir)


def _config(args, bmap, params) -> dict:
    return RunConfig(args.command, args.map, bmap.render(),
                     {"max_steps": args.limits_steps, "max_value": args.limits_value},
                     args.seed, str(_out_dir(args)), args.format, params).to_dict()


def _wants(args, fmt):
    return args.format in (fmt, "both")


def cmd_orbit(args, bmap, limits) -> int:
    res = orbit(bmap, args.n, limits)
    shown = res.iterates[: args.show]
    tail = " ..." if len(res.iterates) > args.show or res.truncated else ""
    print("trajectory: " + ",".join(map(str, shown)) + tail)
    out = res.outcome
    if isinstance(out, EnteredCycle):
        print(f"outcome: EnteredCycle cycle={list(out.cycle.elements)} hitting_time={out.hitting_time}")
    elif isinstance(out, StepLimit):
        print(f"outcome: StepLimit after {limits.max_steps} steps")
    else:
        print(f"outcome: ValueBound at {out.value}")
    for target in ({1, 2}, {4}):
        k = hitting_time(bmap, args.n, target, limits)
        shown = k.reason if isinstance(k, NotReached) else k
        print(f"hitting_time to {sorted(target)}: {shown}")
    return 0 if res.resolved else EXIT_LIMITS


def cmd_classify(args, bmap, limits) -> int:
    if args.window < 1:
        raise _Usage("-N must be >= 1")
    report = classify_window(bmap, args.window, limits, args.method)
    absorbing = check_absorbing(bmap, report)
    invariance = check_basin_invariance(bmap, report)
    out = _out_dir(args)
    cfg = _config(args, bmap, {"window": args.window, "points": args.points, "method": args.method})
    payload = report.to_dict(include_points=args.points)
    payload["method"] = args.method
    payload["checks"] = {"absorbing": absorbing.to_dict(), "basin_invariance": invariance.to_dict()}
    if _wants(args, "json"):
        write_json(out / "hopf_report.json", envelope("hopf-report", cfg, payload))
    if _wants(args, "csv"):
        write_csv(out / "hopf_points.csv", ("n", "class", "cycle_min", "hitting_time"), report.rows())
    c = report.counts()
    cycles = "; ".join("{" + ",".join(map(str, cy.elements[:12])) + ("..." if cy.length > 12 else "") + "}"
                       for cy in report.cycles)
    print(f"counts C={c['C']} D1={c['D1']} U={c['U']}  cycles: {cycles}")
    print(f"absorbing: {'pass' if absorbing else 'FAIL'}  basin invariance: "
          f"{'pass' if invariance else 'FAIL'} (checked {invariance.checked}, skipped {invariance.skipped})")
    return 0 if absorbing and invariance else EXIT_CHECK


def cmd_measure(args, bmap, limits) -> int:
    if args.samples < 1:
        raise _Usage("--samples must be >= 1")
    if not 1 <= args.nmax <= 64:
        raise _Usage("--nmax must lie in 1..64")
    if args.window < 20:
        raise _Usage("-N must be >= 20")
    report = classify_window(bmap, args.window, limits)
    alpha = combine_basins(report, args.delta, args.rho, limits)
    sets = sample_sets(random.Random(args.seed), args.samples, args.window)
    labelled = [("sample", A) for A in sets]
    if args.structured:
        labelled += [("structured", A) for A in STRUCTURED_SETS]
    enforce = bmap == COLLATZ_T
    rows, entries = [], []
    worst, worst_A = Fraction(0), None
    failed = []
    for i, (kind, A) in enumerate(labelled):
        res = power_bound_ratio(alpha, A, args.nmax)
        pre = preimage(bmap, A)
        g = gamma_invariance_check(report, A)
        d_ok = delta_measure(report, pre) == delta_measure(report, A) and delta_measure(report, A) <= len(A)
        entry = {"id": i, "kind": kind, **res.to_dict(), "gamma_invariant": g.passed,
                 "delta_invariant": d_ok}
        entries.append(entry)
        if res.max_ratio > worst:
            worst, worst_A = res.max_ratio, list(A)
        if not g.passed or not d_ok:
            failed.append(i)
        if enforce and res.max_ratio > 2:
            failed.append(i)
        for n, r in enumerate(res.ratios, 1):
            rows.append((i, n, r.numerator, r.denominator, float(r)))
    out = _out_dir(args)
    cfg = _config(args, bmap, {"samples": args.samples, "nmax": args.nmax, "window": args.window,
                               "delta": ratio_str(args.delta), "rho": ratio_str(args.rho),
                               "beta": "geometric", "structured": args.structured})
    payload = {"measure": alpha.describe(), "cycles": [list(c.elements) for c in report.cycles],
               "max_ratio": ratio_str(worst), "max_ratio_float": float(worst), "max_ratio_set": worst_A,
               "bound_enforced": enforce, "failed_ids": sorted(set(failed)), "sets": entries}
    if _wants(args, "json"):
        write_json(out / "measure_report.json", envelope("measure-report", cfg, payload))
    if _wants(args, "csv"):
        write_csv(out / "measure_ratios.csv", ("set_id", "n", "ratio_num", "ratio_den", "ratio_float"), rows)
    print(f"{len(labelled)} sets, n <= {args.nmax}: max ratio {ratio_str(worst)} "
          f"(~{float(worst):.6f}) on A={worst_A}")
    if failed:
        print(f"checks failed for set ids {sorted(set(failed))}")
        return EXIT_CHECK
    return 0


def cmd_averages(args, bmap, limits) -> int:
    window = max(max(args.ys), max(args.as_))
    report = classify_window(bmap, window, limits)
    rows = list(grid_rows(report, args.ys, args.as_, args.Ns))
    out = _out_dir(args)
    cfg = _config(args, bmap, {"ys": args.ys, "as": args.as_, "N": args.Ns})
    table = [(y, a, N, ratio_str(e), ratio_str(x), ratio_str(b), float(e), ok)
             for y, a, N, e, x, b, ok in rows]
    header = ("y", "a", "N", "empirical", "exact", "bound", "empirical_float", "bound_ok")
    if _wants(args, "csv"):
        write_csv(out / "averages.csv", header, table)
    if _wants(args, "json"):
        write_json(out / "averages_report.json",
                   envelope("averages-report", cfg, {"rows": [dict(zip(header, r)) for r in table]}))
    bad = [r for r in rows if not r[-1]]
    print(f"{len(rows)} rows, {len(rows) - len(bad)} within bound")
    return EXIT_CHECK if bad else 0


def cmd_tree(args, bmap, limits) -> int:
    levels = [level(bmap, args.root, j, depth_cap=max(64, args.depth)) for j in range(args.depth + 1)]
    for lv in levels:
        el = lv.sorted()
        print(f"level {lv.level} ({len(el)}): " + ",".join(map(str, el[:40])) + (" ..." if len(el) > 40 else ""))
    if _wants(args, "csv"):
        write_csv(_out_dir(args) / "tree_levels.csv", ("level", "n"),
                  ((lv.level, n) for lv in levels for n in lv.sorted()))
    if _wants(args, "json"):
        cfg = _config(args, bmap, {"root": args.root, "depth": args.depth})
        write_json(_out_dir(args) / "tree_report.json",
                   envelope("tree-report", cfg, {"root": sorted(args.root),
                                                 "levels": [lv.sorted() for lv in levels]}))
    return 0


def _strip(doc):
    return {k: v for k, v in doc.items() if k not in ("config", "version")}


def cmd_report(args, bmap, limits) -> int:
    docs = []
    for f in args.files:
        with open(f, encoding="utf-8") as fh:
            docs.append(json.load(fh))
    if args.action == "compare":
        if len(docs) != 2:
            raise _Usage("compare takes exactly two files")
        a, b = _strip(docs[0]), _strip(docs[1])
        diff = sorted(k for k in set(a) | set(b) if a.get(k) != b.get(k))
        print("identical" if not diff else "differ in: " + ", ".join(diff))
        return 0 if not diff else 1
    kinds = {d.get("schema") for d in docs}
    if kinds != {"collatz-ergodic/measure-report"}:
        raise _Usage("merge supports measure reports only")
    merged_sets, worst, worst_A = [], Fraction(0), None
    for d in docs:
        for s in d["sets"]:
            s = dict(s, id=len(merged_sets))
            s["bound_enforced"] = d["bound_enforced"]
            merged_sets.append(s)
            r = Fraction(s["max_ratio"])
            if r > worst:
                worst, worst_A = r, s["A"]
    cfg = _config(args, bmap, {"action": "merge", "sources": args.files})
    payload = {"measure": docs[0]["measure"], "cycles": docs[0]["cycles"], "sets": merged_sets,
               "max_ratio": ratio_str(worst), "max_ratio_float": float(worst), "max_ratio_set": worst_A,
               "bound_enforced": any(d["bound_enforced"] for d in docs),
               "failed_ids": [s["id"] for s in merged_sets
                              if not (s["gamma_invariant"] and s["delta_invariant"])
                              or (s["bound_enforced"] and Fraction(s["max_ratio"]) > 2)]}
    path = write_json(_out_dir(args) / args.output, envelope("measure-report", cfg, payload))
    print(f"merged {len(merged_sets)} sets into {path}")
    return 0


class _Usage(Exception):
    pass


COMMANDS = {"orbit": cmd_orbit, "classify": cmd_classify, "measure": cmd_measure,
            "averages": cmd_averages, "tree": cmd_tree, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "orbit" and args.n < 1:
        parser.error("n must be >= 1")
    try:
        limits = Limits(args.limits_steps, args.limits_value)
    except ValueError as e:
        parser.error(str(e))
    try:
        bmap = load_map(args.map)
    except (MapSpecError, OSError) as e:
        print(f"error: invalid map {args.map!r}: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, bmap, limits)
    except _Usage as e:
        parser.error(str(e))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
