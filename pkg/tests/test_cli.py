import csv
import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import pytest

from decafsa.cli import _ints, main, read_history
from decafsa.instances import bundled, distance_matrix, from_points, to_tsplib
from decafsa.mtsp import load_scenario, validate_plan, MtspPlan
from decafsa.tours import is_tour, tour_length

SCENARIO = resources.files("decafsa.data").joinpath("eil101_watersheds.json")
FAST = ["--iters", "15", "--fish", "8", "--trynum", "5", "--chaos-budget", "5"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def tree_bytes(root: Path):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_seed_syntax():
    assert _ints("0..3") == [0, 1, 2, 3]
    assert _ints("5,7,9..10") == [5, 7, 9, 10]


def test_solve_eil101_history_rows(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--instance", "eil101", "--variant", "de-cafsa", "--iters", "200",
                 "--seed", "42", "--out", str(out)]) == 0
    rows = read_csv(out / "history.csv")
    assert rows[0] == ["iteration", "best_fitness"]
    assert len(rows) == 201
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 201))
    values = [float(r[1]) for r in rows[1:]]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert all(len(r[1].split(".")[1]) == 4 for r in rows[1:])
    doc = json.loads((out / "result.json").read_text())
    assert is_tour(doc["best_tour"], 101)
    d = distance_matrix(bundled("eil101"))
    assert tour_length(doc["best_tour"], d) == pytest.approx(doc["best_fitness"], abs=1e-4)
    assert doc["best_fitness"] == pytest.approx(values[-1], abs=1e-4)


def test_solve_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["solve", "--instance", "oliver30", "--seed", "5", *FAST,
                     "--out", str(tmp_path / name)]) == 0
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")


def test_solve_from_file_and_csv(tmp_path):
    path = tmp_path / "tiny.tsp"
    path.write_text(to_tsplib(from_points([(0, 0), (3, 0), (3, 4), (0, 4), (1, 2)], "tiny")))
    assert main(["solve", "--instance", str(path), "--variant", "afsa", "--format", "csv",
                 "--metric", "rounded", *FAST, "--out", str(tmp_path / "o")]) == 0
    rows = dict(read_csv(tmp_path / "o" / "result.csv")[1:])
    assert rows["instance"] == "tiny"
    assert sorted(map(int, rows["best_tour"].split())) == list(range(5))


def test_bench_report_and_regeneration(tmp_path, capsys):
    out = tmp_path / "bench"
    assert main(["bench", "--instance", "oliver30", "--seeds", "0..2", *FAST,
                 "--out", str(out)]) == 0
    rows = read_csv(out / "report.csv")
    assert rows[0] == ["variant", "optimal", "worst", "average", "runs"]
    assert [r[0] for r in rows[1:]] == ["afsa", "cafsa", "de", "de-afsa", "de-cafsa"]
    for r in rows[1:]:
        opt, worst, avg = map(float, r[1:4])
        assert opt <= avg <= worst and r[4] == "3"
    assert len(list((out / "histories").glob("*.csv"))) == 15
    doc = json.loads((out / "report.json").read_text())
    assert [row["seeds"] for row in doc["rows"]] == [[0, 1, 2]] * 5
    assert read_csv(out / "timing.csv")[0] == ["variant", "average_time_s"]

    capsys.readouterr()
    assert main(["report", "--from", str(out), "--out", str(tmp_path / "again.csv")]) == 0
    regenerated = read_csv(tmp_path / "again.csv")
    assert [r[0] for r in regenerated] == [r[0] for r in rows]
    for live, rebuilt in zip(rows[1:], regenerated[1:]):
        for a, b in zip(live[1:4], rebuilt[1:4]):
            assert float(a) == pytest.approx(float(b), abs=1e-4)
    assert capsys.readouterr().out.splitlines()[0] == "variant,optimal,worst,average,runs"


def test_bench_single_seed_collapses(tmp_path):
    out = tmp_path / "b"
    assert main(["bench", "--instance", "oliver30", "--variant", "cafsa,afsa", "--runs", "1",
                 *FAST, "--out", str(out), "--format", "csv"]) == 0
    for r in read_csv(out / "report.csv")[1:]:
        assert r[1] == r[2] == r[3]
    assert not (out / "report.json").exists()


def test_bench_is_byte_identical_and_parallel_safe(tmp_path):
    args = ["bench", "--instance", "oliver30", "--variant", "de-cafsa,afsa", "--seeds", "3,4",
            *FAST]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    assert main([*args, "--jobs", "2", "--out", str(tmp_path / "c")]) == 0
    a, b, c = (tree_bytes(tmp_path / x) for x in "abc")
    timing = Path("timing.csv")
    for t in (a, b, c):
        t.pop(timing)
    assert a == b == c


def test_mtsp_outputs(tmp_path):
    out = tmp_path / "m"
    assert main(["mtsp", "--scenario", str(SCENARIO), "--groups", "2,5", "--iters", "60",
                 "--out", str(out)]) == 0
    sc = load_scenario(SCENARIO)
    hours = {}
    for K in (2, 5):
        rows = read_csv(out / f"plan_K{K}.csv")
        assert rows[0] == ["group", "sequence"] and len(rows) == K + 1
        segments = []
        for _, seq in rows[1:]:
            labels = seq.split("-")
            assert labels[0] == labels[-1] == "101"
            segments.append([sc.labels.index(x) for x in labels[1:-1]])
        plan = MtspPlan.from_segments(segments, sc.N)
        assert validate_plan(plan, K, sc.N) == []
        doc = json.loads((out / f"cost_K{K}.json").read_text())
        assert doc["cost"]["total"] == pytest.approx(
            doc["cost"]["C1"] + doc["cost"]["C2"] + doc["cost"]["C3"], abs=1e-3)
        hours[K] = max(doc["cost"]["group_hours"])
        hist = read_history(out / f"history_K{K}.csv")
        assert len(hist) == 60
        assert hist[-1] == pytest.approx(doc["cost"]["total"], abs=1e-4)
    assert hours[5] < hours[2]
    schemes = read_csv(out / "schemes.csv")
    assert [r[0] for r in schemes[1:]] == ["2", "5"]


def test_mtsp_zero_rates(tmp_path):
    scenario = tmp_path / "zero.json"
    scenario.write_text(json.dumps({
        "sites": [[0, 0], [5, 1], [2, 7], [9, 9], [4, 4]], "depot": [1, 1], "groups": [1, 2],
        "cost": {"p1": 0, "q": 0, "p2": 0, "m": 0, "p3": 0, "p4": 0, "t": 0},
    }))
    out = tmp_path / "z"
    assert main(["mtsp", "--scenario", str(scenario), *FAST, "--out", str(out)]) == 0
    for K in (1, 2):
        assert json.loads((out / f"cost_K{K}.json").read_text())["cost"]["total"] == 0


@pytest.mark.parametrize("argv", [
    ["solve", "--instance", "does-not-exist.tsp"],
    ["bench", "--instance", "oliver30", "--variant", "ga"],
    ["bench", "--instance", "oliver30", "--seeds", "1,2", "--runs", "3"],
    ["solve", "--instance", "oliver30", "--lambda", "0.5,0.5,0.5"],
    ["solve", "--instance", "oliver30", "--fish", "1"],
    ["report", "--from", "nowhere"],
])
def test_errors_exit_nonzero(tmp_path, capsys, argv):
    assert main([*argv, "--out", str(tmp_path / "x")] if argv[0] != "report" else argv) == 2
    assert "decafsa: error:" in capsys.readouterr().err


def test_bad_tsplib_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.tsp"
    path.write_text("NAME: b\nDIMENSION: 2\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n"
                    "1 0 0\n2 x 1\n")
    assert main(["solve", "--instance", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "line 6" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "decafsa", "solve", "--instance", "oliver30",
                         *FAST, "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert ok.returncode == 0 and "oliver30" in ok.stdout
    bad = subprocess.run([sys.executable, "-m", "decafsa", "solve"], capture_output=True,
                         text=True)
    assert bad.returncode != 0 and "--instance" in bad.stderr
