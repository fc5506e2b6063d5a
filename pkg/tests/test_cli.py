import csv
import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from collatz_ergodic import __version__
from collatz_ergodic.cli import main
from collatz_ergodic.reporting import load_schema

SPEC = str(Path(__file__).resolve().parents[1] / "mapspecs" / "3n-minus-1.spec")


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as e:
        code = e.code
    out = capsys.readouterr()
    return code, out.out, out.err


def load(path, kind):
    doc = json.loads(Path(path).read_text())
    jsonschema.validate(doc, load_schema(kind))
    assert doc["version"] == __version__ and doc["schema"] == f"collatz-ergodic/{kind}"
    return doc


def test_orbit(capsys):
    code, out, _ = run(["orbit", "--map", "collatz-t", "7"], capsys)
    assert code == 0
    assert "7,11,17,26,13,20,10,5,8,4,2,1" in out and "EnteredCycle" in out
    assert "hitting_time to [1, 2]: 10" in out and "hitting_time to [4]: 9" in out


def test_orbit_original_map(capsys):
    code, out, _ = run(["orbit", "--map", "collatz-s", "3"], capsys)
    assert code == 0 and "3,10,5,16,8,4,2,1" in out


@pytest.mark.parametrize("argv", [["orbit", "0"], ["orbit", "x"], ["classify", "-N", "0"],
                                  ["measure", "--samples", "0"], ["averages", "--ys", "3,,x"],
                                  ["averages", "--N", "0"], ["orbit", "--limits-steps", "0", "3"]])
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_invalid_map(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("mod 2 { 0: (1n+0)/2; 1: (3n+1)/4 }")
    code, _, err = run(["orbit", "--map", str(bad), "3"], capsys)
    assert code == 2 and "invalid map" in err
    assert run(["orbit", "--map", "missing-map", "3"], capsys)[0] == 2


def test_orbit_limit_exhaustion_prints_partial(capsys):
    code, out, _ = run(["orbit", "27", "--limits-steps", "10"], capsys)
    assert code == 3 and out.startswith("trajectory: 27,41,62") and "StepLimit" in out
    code, out, _ = run(["orbit", "27", "--limits-value", "1000"], capsys)
    assert code == 3 and "ValueBound" in out


def test_classify(tmp_path, capsys):
    code, out, _ = run(["classify", "-N", "100000", "--out-dir", str(tmp_path)], capsys)
    assert code == 0 and "C=2 D1=99998 U=0" in out
    doc = load(tmp_path / "hopf_report.json", "hopf-report")
    assert doc["counts"]["C"] == 2 and doc["checks"]["absorbing"]["passed"]
    assert doc["config"]["params"]["window"] == 100000
    with open(tmp_path / "hopf_points.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "class", "cycle_min", "hitting_time"] and len(rows) == 100001
    assert rows[7] == ["7", "D1", "1", "10"]


def test_classify_multi_cycle_spec(tmp_path, capsys):
    code, out, _ = run(["classify", "--map", SPEC, "-N", "1000", "--points", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    doc = load(tmp_path / "hopf_report.json", "hopf-report")
    assert len(doc["cycles"]) >= 3 and len(doc["points"]) == 1000
    assert run(["classify", "--map", "3n-minus-1.spec", "-N", "50", "--format", "csv",
                "--out-dir", str(tmp_path / "b")], capsys)[0] == 0
    assert not (tmp_path / "b" / "hopf_report.json").exists()


def test_classify_unresolved_still_exit_0(tmp_path, capsys):
    code, out, _ = run(["classify", "-N", "200", "--limits-steps", "20", "--out-dir", str(tmp_path)], capsys)
    assert code == 0 and "U=0" not in out


def test_measure_seed_0_reports_ratio_above_2(tmp_path, capsys):
    code, out, _ = run(["measure", "--samples", "100", "--nmax", "32", "--out-dir", str(tmp_path)], capsys)
    doc = load(tmp_path / "measure_report.json", "measure-report")
    assert code == 4 and doc["failed_ids"] == [35]
    assert 2 in doc["max_ratio_set"] and len(doc["max_ratio_set"]) == 20 and doc["max_ratio_float"] > 2


def test_measure_seed_1_passes(tmp_path, capsys):
    code, out, _ = run(["measure", "--samples", "100", "--nmax", "32", "--seed", "1",
                        "--out-dir", str(tmp_path)], capsys)
    doc = load(tmp_path / "measure_report.json", "measure-report")
    assert code == 0 and doc["max_ratio"] == "1/2" and doc["failed_ids"] == []
    assert doc["config"]["seed"] == 1 and len(doc["sets"]) == 100
    with open(tmp_path / "measure_ratios.csv") as fh:
        assert sum(1 for _ in fh) == 1 + 100 * 32


def test_measure_structured_sets(tmp_path, capsys):
    code, out, _ = run(["measure", "--samples", "4", "--nmax", "8", "--seed", "1", "--structured",
                        "--out-dir", str(tmp_path)], capsys)
    doc = load(tmp_path / "measure_report.json", "measure-report")
    structured = {tuple(s["A"]): s["max_ratio"] for s in doc["sets"] if s["kind"] == "structured"}
    assert structured[(4,)] == "1/4" and structured[(1,)] == "4387/2048"
    assert code == 4


def test_measure_other_map_has_no_hard_bound(tmp_path, capsys):
    code, out, _ = run(["measure", "--map", SPEC, "--samples", "10", "--nmax", "16", "--structured",
                        "--out-dir", str(tmp_path)], capsys)
    doc = load(tmp_path / "measure_report.json", "measure-report")
    assert code == 0 and not doc["bound_enforced"] and doc["max_ratio_float"] > 2
    assert len(doc["measure"]["basins"]) == 3


def test_averages(tmp_path, capsys):
    code, out, _ = run(["averages", "--ys", "3,7,27", "--as", "1,2", "--N", "100,1000,10000",
                        "--out-dir", str(tmp_path)], capsys)
    assert code == 0 and "18 rows, 18 within bound" in out
    doc = load(tmp_path / "averages_report.json", "averages-report")
    assert all(r["bound_ok"] for r in doc["rows"])
    code, out, _ = run(["averages", "--as", "3", "--out-dir", str(tmp_path)], capsys)
    with open(tmp_path / "averages.csv") as fh:
        assert {r["exact"] for r in csv.DictReader(fh)} == {"0/1"}


def test_tree(tmp_path, capsys):
    code, out, _ = run(["tree", "--root", "1", "--depth", "4", "--out-dir", str(tmp_path)], capsys)
    doc = load(tmp_path / "tree_report.json", "tree-report")
    assert code == 0 and doc["levels"] == [[1], [2], [1, 4], [2, 8], [1, 4, 5, 16]]


def test_report_compare_and_merge(tmp_path, capsys):
    for seed in (1, 2):
        run(["measure", "--samples", "6", "--nmax", "8", "--seed", str(seed),
             "--out-dir", str(tmp_path / str(seed))], capsys)
    a, b = str(tmp_path / "1" / "measure_report.json"), str(tmp_path / "2" / "measure_report.json")
    assert run(["report", "compare", a, a], capsys)[0] == 0
    assert run(["report", "compare", a, b], capsys)[0] == 1
    assert run(["report", "merge", a, b, "--out-dir", str(tmp_path)], capsys)[0] == 0
    doc = load(tmp_path / "merged_measure_report.json", "measure-report")
    assert len(doc["sets"]) == 12 and [s["id"] for s in doc["sets"]] == list(range(12))


def test_env_overrides_out_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("COLLATZ_ERGODIC_OUT", str(tmp_path / "env"))
    run(["tree", "--depth", "2", "--out-dir", str(tmp_path / "flag")], capsys)
    assert (tmp_path / "env" / "tree_report.json").exists() and not (tmp_path / "flag").exists()


def test_byte_reproducible(tmp_path, monkeypatch, capsys):
    outputs = []
    for run_dir in ("a", "b"):
        (tmp_path / run_dir).mkdir()
        monkeypatch.chdir(tmp_path / run_dir)
        run(["measure", "--samples", "12", "--nmax", "10", "--structured", "--out-dir", "out"], capsys)
        run(["classify", "--map", "3n-minus-1", "-N", "3000", "--points", "--out-dir", "out"], capsys)
        run(["averages", "--out-dir", "out"], capsys)
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / run_dir / "out").iterdir())})
    assert len(outputs[0]) == 6 and outputs[0] == outputs[1]


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "collatz_ergodic.cli", "orbit", "6"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "6,3,5,8,4,2,1" in res.stdout
