import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from indexbench.chains import Chain
from indexbench.context import TraceContext
from indexbench.errors import ScenarioError
from indexbench.scenarios import load_scenario, run
from indexbench.serialization import (
    decode_chain,
    decode_matrix,
    encode_chain,
    encode_matrix,
    dumps,
)

DATA = Path(__file__).resolve().parent.parent / "src" / "indexbench" / "data"


def test_matrix_roundtrip():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    back = decode_matrix(encode_matrix(m))
    assert np.array_equal(back, m)


def test_matrix_row_length_error_names_entry():
    with pytest.raises(ScenarioError) as err:
        decode_matrix([[[1, 0], [0, 0]], [[1, 0]]], "modules.base.D")
    assert "modules.base.D" in str(err.value)
    assert "row 1" in str(err.value)


def test_matrix_entry_shape_error():
    with pytest.raises(ScenarioError) as err:
        decode_matrix([[[1, 0], [0]], [[0, 0], [1, 0]]], "m")
    assert "[0][1]" in str(err.value)


def test_chain_roundtrip():
    ctx = TraceContext([(2, 1.0)])
    rng = np.random.default_rng(1)
    c = Chain(ctx, 1, [(1 + 2j, [rng.normal(size=(2, 2)),
                                 rng.normal(size=(2, 2))])])
    back = decode_chain(ctx, encode_chain(c))
    assert back.level == 1
    assert back.terms[0][0] == 1 + 2j
    for a, b in zip(back.terms[0][1], c.terms[0][1]):
        assert np.array_equal(a, b)


def test_load_builtin_scenarios():
    for name in ("type1_worked", "type2_fractional", "odd_consistency"):
        sc = load_scenario(DATA / f"{name}.json")
        assert sc.tasks


def test_unknown_task_kind_lists_valid(tmp_path):
    bad = {"name": "x", "ctx": {"blocks": [[1, 1.0]]},
           "modules": {}, "tasks": [{"kind": "frobnicate"}]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    with pytest.raises(ScenarioError) as err:
        load_scenario(path)
    assert "frobnicate" in str(err.value)
    assert "kernel_index" in str(err.value)


def test_parse_error_has_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json }")
    with pytest.raises(ScenarioError) as err:
        load_scenario(path)
    assert "line" in str(err.value)


def test_run_type1_scenario_all_pass():
    sc = load_scenario(DATA / "type1_worked.json")
    report = run(sc, {"seed": 0})
    assert report["pass"]
    assert report["summary"]["failed"] == 0
    values = {(r["kind"], r.get("report", {}).get("diagnostics", {}).get("t"),
               r.get("report", {}).get("diagnostics", {}).get("level")):
              r.get("value") for r in report["tasks"] if "value" in r}
    index_values = [r["value"] for r in report["tasks"]
                    if r["kind"] in ("kernel_index", "parametrix_index",
                                     "mckean_singer", "connes_pairing")]
    assert all(abs(v - 1.0) <= 1e-8 for v in index_values)


def test_run_fractional_scenario_consistency():
    sc = load_scenario(DATA / "type2_fractional.json")
    report = run(sc, {"seed": 0})
    assert report["pass"], [r for r in report["tasks"] if not r["pass"]]
    index_values = [r["value"] for r in report["tasks"]
                    if "value" in r
                    and r["kind"] in ("kernel_index", "parametrix_index",
                                      "mckean_singer", "connes_pairing")]
    assert all(abs(v - 1.0 / 3.0) <= 1e-8 for v in index_values)
    # the deliberate error task is captured, not fatal
    err_rows = [r for r in report["tasks"] if "error" in r]
    assert err_rows and all(r["pass"] for r in err_rows)
    assert "double" in err_rows[0]["error"]


def test_run_determinism():
    sc = load_scenario(DATA / "type2_fractional.json")
    r1 = run(sc, {"seed": 3})
    r2 = run(sc, {"seed": 3})

    def strip(report):
        out = []
        for row in report["tasks"]:
            row = dict(row)
            row.pop("wall_time", None)
            out.append(row)
        return dumps({"tasks": out, "summary": report["summary"]})

    assert strip(r1) == strip(r2)


def test_run_parallel_jobs_same_result():
    sc = load_scenario(DATA / "type1_worked.json")
    r1 = run(sc, {"seed": 0, "jobs": 1})
    r4 = run(sc, {"seed": 0, "jobs": 4})
    v1 = [row.get("value") for row in r1["tasks"]]
    v4 = [row.get("value") for row in r4["tasks"]]
    assert v1 == v4


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "indexbench.cli", *args],
                          capture_output=True, text=True)


def test_cli_run_exit_codes(tmp_path):
    out = tmp_path / "report.json"
    proc = _cli("run", str(DATA / "type1_worked.json"), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    report = json.loads(out.read_text())
    assert report["pass"]
    # usage / parse errors exit 2
    proc = _cli("run", str(tmp_path / "missing.json"))
    assert proc.returncode == 2


def test_cli_failing_expectation(tmp_path):
    data = json.loads((DATA / "type1_worked.json").read_text())
    data["tasks"] = [t for t in data["tasks"] if t["kind"] == "kernel_index"]
    data["tasks"][0]["expected"] = 0.5
    bad = tmp_path / "wrong.json"
    bad.write_text(json.dumps(data))
    proc = _cli("run", str(bad))
    assert proc.returncode == 1


def test_cli_verify_suite():
    proc = _cli("verify", "--suite", "appendix")
    assert proc.returncode == 0, proc.stderr
    assert "[pass]" in proc.stdout


def test_cli_pair(tmp_path):
    module = {
        "ctx": {"blocks": [[2, 1.0]]},
        "D": encode_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
        "grading": [1, -1],
        "generators": [encode_matrix(np.diag([1.0, 0.0]))],
    }
    ktheory = {"kind": "projection",
               "matrix": encode_matrix(np.diag([1.0, 0.0])), "N": 1}
    mp, kp = tmp_path / "m.json", tmp_path / "k.json"
    mp.write_text(json.dumps(module))
    kp.write_text(json.dumps(ktheory))
    out = tmp_path / "pair.json"
    proc = _cli("pair", "--module", str(mp), "--ktheory", str(kp),
                "--levels", "0..6", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    report = json.loads(out.read_text())
    methods = {p["method"] for p in report["pairings"]}
    assert {"cohomological_connes", "kernel", "mckean_singer",
            "cohomological_jlo"} <= methods
    non_jlo = [p["value"] for p in report["pairings"]
               if p["method"] != "cohomological_jlo"]
    assert all(abs(v - 1.0) <= 1e-8 for v in non_jlo)


def test_cli_version():
    proc = _cli("--version")
    assert proc.returncode == 0
