import csv
import json
from fractions import Fraction

import pytest

from hpx.bounds import solve_cp
from hpx.cli import ExperimentConfig, main, run
from hpx.extremal import SearchConfig
from hpx.pipeline import pipeline_envelope
from hpx.report import body_of

QUICK = {"chains": 2, "steps": 2000}


@pytest.fixture
def files(tmp_path):
    (tmp_path / "cap.txt").write_text("# AP-free\n0,0\n0,1\n1,0\n1,1\n")
    (tmp_path / "empty.txt").write_text("")
    (tmp_path / "spec.json").write_text(json.dumps({"p": 3, "dims": [2]}))
    (tmp_path / "quick.json").write_text(json.dumps(QUICK))
    return tmp_path


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_bounds_example(capsys):
    code, rep, _ = call(capsys, "bounds", "--p", 3, "--deltas", "0.5")
    assert code == 0
    row = rep["rows"][0]
    assert row["lower"] == pytest.approx((1 / 6) ** solve_cp(3).C_p)
    assert row["upper_weak"] == 0.125
    assert rep["provenance"] == "float-analytic"


def test_count_commands(capsys, files):
    code, rep, _ = call(capsys, "count", "--spec", files / "spec.json", "--set", files / "empty.txt")
    assert code == 0 and rep["density"]["rational"] == "0/1"
    code, rep, _ = call(capsys, "count", "--spec", files / "spec.json", "--set", files / "cap.txt")
    assert rep["density"]["rational"] == "4/81" and rep["nontrivial_count"] == 0
    code, rep2, _ = call(capsys, "count", "--spec", files / "spec.json", "--set",
                         files / "cap.txt", "--fourier")
    assert rep2["density"] == rep["density"] and rep2["method"] == "fourier"
    code, rep, _ = call(capsys, "hp-size", "--p", 3, "--dims", "1,1")
    assert rep["hp_size"] == 243


def test_extremal_commands(capsys, files):
    code, rep, _ = call(capsys, "extremal", "exact", "--spec", files / "spec.json")
    assert rep["value"]["rational"] == "4/9" and rep["witness"] == ["0,0", "0,1", "1,0", "1,1"]
    code, rep, _ = call(capsys, "extremal", "exact", "--p", 3, "--dims", 1, "--delta", "2/3")
    assert rep["value"]["rational"] == "2/9"
    code, rep, _ = call(capsys, "extremal", "search", "--spec", files / "spec.json",
                        "--delta", "4/9", "--config", files / "quick.json", "--seed", 4)
    assert code == 0 and rep["value"]["rational"] == "4/81" and rep["seed"] == 4
    assert rep["provenance"] == "search"


def test_envelope_csv(capsys, files):
    src = files / "pts.csv"
    src.write_text("delta,value,provenance\n0.5,0.9,search\n0.25,0.01,exact\n")
    code, rep, _ = call(capsys, "envelope", "--in", src, "--csv", files / "hull.csv")
    assert code == 0
    rows = list(csv.DictReader(open(files / "hull.csv")))
    assert [r["delta"] for r in rows] == ["0.0", "0.25", "1.0"]
    assert set(rows[0]) == {"delta", "value", "provenance"}


def test_ip_commands(capsys, files):
    code, rep, _ = call(capsys, "ip", "char-average", "--p", 3, "--xi", "1,2", "--N", 10)
    assert rep["difference"] < 1e-10
    code, rep, _ = call(capsys, "ip", "double-limit", "--p", 3, "--n", 2, "--xi", "1,1",
                        "--grid", "0:10,0:40", "--csv", files / "dl.csv")
    assert rep["rows"][-1]["deviation"] < rep["rows"][0]["deviation"]
    assert list(csv.DictReader(open(files / "dl.csv")))[0].keys() == {"D", "N", "value", "deviation"}
    code, rep, _ = call(capsys, "ip", "weyl-check", "--p", 3, "--n", 2, "--set", files / "cap.txt",
                        "--grid", "0:40")
    assert rep["rows"][0]["deviation"] < 0.01
    code, rep, _ = call(capsys, "ip", "matrix-check", "--p", 3, "--n", 2, "--set", files / "cap.txt")
    assert rep["all_equal"] and len(rep["rows"]) == 8


def test_random_commands(capsys):
    code, rep, _ = call(capsys, "random", "delta-k", "--p", 3, "--delta", "0.3", "--window", 7,
                        "--seed", 2)
    assert code == 0 and rep["provenance"] == "monte-carlo" and rep["seed"] == 2
    code, rep, _ = call(capsys, "random", "verify", "--p", 3, "--factors", "1,0,0",
                        "--windows", "4,5", "--seed", 1)
    assert rep["passed"]


def test_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv("HPX_SEED", "77")
    code, rep, _ = call(capsys, "random", "delta-k", "--p", 3, "--delta", "0.3", "--window", 5,
                        "--seed", 2)
    assert rep["seed"] == 77
    monkeypatch.setenv("HPX_SEED", "x")
    code, _, err = call(capsys, "random", "delta-k", "--p", 3, "--delta", "0.3", "--window", 5)
    assert code == 2 and json.loads(err)["exit_code"] == 2


def test_exit_codes(capsys, files):
    code, _, err = call(capsys, "count", "--p", 4, "--dims", 1, "--set", files / "empty.txt")
    assert code == 2 and json.loads(err)["error"] == "ValueError"
    code, _, _ = call(capsys, "count", "--p", 3, "--dims", 8, "--set", files / "empty.txt",
                      "--budget", 100)
    assert code == 3
    code, _, _ = call(capsys, "bogus")
    assert code == 2
    code, _, _ = call(capsys, "count", "--set", files / "missing.txt", "--p", 3, "--dims", 1)
    assert code == 2
    attach = files / "a.json"
    attach.write_text(json.dumps({"delta": 0.5, "value": 0.3}))
    code, rep, _ = call(capsys, "bounds", "--p", 3, "--deltas", "0.5", "--attach", attach)
    assert code == 4 and rep["status"] == "VIOLATION"


SEEDED = [
    ["extremal", "search", "--p", "3", "--dims", "2", "--delta", "5/9", "--seed", "9"],
    ["random", "verify", "--p", "5", "--delta", "0.5", "--windows", "3,4", "--seed", "5"],
    ["random", "delta-k", "--p", "3", "--delta", "0.3", "--window", "6", "--seed", "6"],
    ["pipeline", "--p", "3", "--ladder", "1;2", "--deltas", "4/9,2/3", "--seed", "1"],
]


@pytest.mark.parametrize("argv", SEEDED, ids=lambda a: a[0] + "-" + a[1])
def test_replay_byte_identical(argv, files, capsys):
    out = files / "r.json"
    assert main(argv + ["--out", str(out)]) == 0
    first = out.read_text()
    man = json.loads((files / "r.json.manifest.json").read_text())
    assert json.loads(first)["config_hash"] == man["config_hash"]
    capsys.readouterr()
    again = files / "again.json"
    assert main(["replay", str(files / "r.json.manifest.json"), "--out", str(again)]) == 0
    assert json.loads(capsys.readouterr().out)["match"] is True
    a, b = json.loads(first), json.loads(again.read_text())
    assert json.dumps(body_of(a), sort_keys=True) == json.dumps(body_of(b), sort_keys=True)


def test_replay_detects_tampering(files, capsys):
    out = files / "r.json"
    main(["random", "delta-k", "--p", "3", "--delta", "0.3", "--window", "5", "--out", str(out)])
    path = files / "r.json.manifest.json"
    man = json.loads(path.read_text())
    man["config"]["seed"] = 123
    path.write_text(json.dumps(man))
    assert main(["replay", str(path)]) == 1


def test_run_config_roundtrip(tmp_path, capsys):
    cfg = ExperimentConfig("bounds", {"p": 3, "deltas": [0.25]}, report=str(tmp_path / "b.json"))
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    assert run(cfg) == 0
    assert json.loads((tmp_path / "b.json").read_text())["config_hash"] == cfg.hash()


def test_pipeline_segment_and_bracket():
    res = pipeline_envelope(3, 3, [(1,), (2,)], [0, 1])
    assert res.hull.vertices() == [(0.0, 0.0), (1.0, 1.0)]
    res = pipeline_envelope(3, 3, [(1,), (2,)], [2 / 3])
    v = res.envelope_at(2 / 3)
    assert v <= 2 / 9 + 1e-15
    assert v >= (2 / 9) ** solve_cp(3).C_p


def test_pipeline_running_min():
    deltas = [i / 9 for i in range(1, 9)]
    one = pipeline_envelope(3, 3, [(1,)], deltas)
    two = pipeline_envelope(3, 3, [(1,), (2,)], deltas)
    for d in deltas:
        assert two.minima[d] <= one.minima[d]
    cells = [c for c in two.cells if c.delta == deltas[3]]
    assert cells[1].running_min == min(c.value for c in cells)


def test_pipeline_uses_search_beyond_exact_range():
    res = pipeline_envelope(3, 3, [(3,)], [0.3], SearchConfig(seed=0, chains=1, steps=500))
    assert res.cells[0].provenance == "search"
    assert res.minima[0.3] >= Fraction(0)
