from __future__ import annotations

import csv
import io
import json

import pytest

from tdesign import schemas
from tdesign.cli import EXIT_GUARD, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_OK, run


def _run(argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _artifact(text):
    return json.loads(text)


@pytest.fixture
def bw4(tmp_path):
    path = tmp_path / "bw4.json"
    code, _, _ = _run(["generate", "brickwork1d", "--n", "4", "--bc", "periodic", "--out", str(path)])
    assert code == EXIT_OK
    return path


def test_generate_brickwork(bw4):
    art = json.loads(bw4.read_text())
    assert art["result"]["layers"] == [[[0, 1], [2, 3]], [[1, 2], [3, 0]]]
    assert art["manifest"]["subcommand"] == "generate"
    schemas.validate_artifact("generate", art)


def test_gap_dense(bw4):
    code, out, _ = _run(["gap", "--arch", str(bw4), "--t", "2", "--method", "dense"])
    assert code == EXIT_OK
    report = _artifact(out)["result"]["report"]
    assert report["ssv"] == pytest.approx(0.32, abs=1e-9)
    assert report["ssv"] <= 0.64 + 1e-9
    assert report["unit_dim"] == 2


def test_bound(bw4):
    code, out, _ = _run(["bound", "--arch", str(bw4), "--t", "2", "--eps", "0.01"])
    assert code == EXIT_OK
    result = _artifact(out)["result"]
    best = next(r for r in result["reports"] if r["tightest"])
    assert best["k_star"] == pytest.approx(35.17, abs=0.01)
    assert best["d_star"] == 72


def test_artifacts_accept_raw_json_and_prior_artifacts(tmp_path, bw4):
    raw = tmp_path / "raw.json"
    raw.write_text(json.dumps(json.loads(bw4.read_text())["result"]))
    _, a, _ = _run(["gap", "--arch", str(raw)])
    _, b, _ = _run(["gap", "--arch", str(bw4)])
    assert _artifact(a)["result"] == _artifact(b)["result"]


def test_determinism_apart_from_timestamp(bw4):
    def strip(text):
        art = _artifact(text)
        art["manifest"].pop("timestamp")
        return json.dumps(art, sort_keys=True)

    argv = ["frame-potential", "--arch", str(bw4), "--mode", "both", "--samples", "200", "--seed", "5"]
    assert strip(_run(argv)[1]) == strip(_run(argv)[1])


def test_stdio_mode(monkeypatch, bw4):
    code, out, _ = _run(["analyze", "--stdio"], stdin=bw4.read_text(), monkeypatch=monkeypatch)
    assert code == EXIT_OK
    art = _artifact(out)
    assert art["result"]["decomposition"]["k"] == 1
    assert art["manifest"]["inputs"]["arch"]["path"] == "<stdin>"


def test_reduce_and_decompose(tmp_path):
    graph = tmp_path / "g.json"
    graph.write_text(json.dumps({"weights": [4, 4], "edges": [[0, 1]] * 4}))
    code, out, _ = _run(["reduce", "--graph", str(graph)])
    assert code == EXIT_OK
    assert _artifact(out)["result"]["loop_sizes"] == [8]
    tree = tmp_path / "t.json"
    tree.write_text(json.dumps({"weights": [3, 1, 1, 1], "edges": [[0, 1], [0, 2], [0, 3]]}))
    code, out, _ = _run(["decompose", "--graph", str(tree)])
    assert code == EXIT_OK
    decs = _artifact(out)["result"]["decompositions"]
    assert [d["method"] for d in decs] == ["tree", "loglog"]
    assert all(d["contraction_verified"] and d["num_layers"] <= d["bound"] for d in decs)


def test_reduce_from_architecture(bw4):
    code, out, _ = _run(["reduce", "--arch", str(bw4), "--layer", "1"])
    assert code == EXIT_OK
    assert _artifact(out)["result"]["loop_sizes"] == [4]


def test_sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    code, out, _ = _run(["sweep", "--n-list", "4,8", "--eps-list", "0.01,0.001", "--csv", str(path)])
    assert code == EXIT_OK
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == len(_artifact(out)["result"]["rows"])
    first = next(r for r in rows if r["N"] == "4" and r["eps"] == "0.01" and r["path"] == "complete_periodic")
    assert float(first["k_star"]) == pytest.approx(35.169, abs=1e-3)


def test_anneal_and_ensemble(tmp_path):
    csv_path = tmp_path / "anneal.csv"
    code, out, _ = _run(["anneal", "--n", "4", "--layers", "3", "--iterations", "30", "--csv", str(csv_path)])
    assert code == EXIT_OK
    assert len(list(csv.DictReader(csv_path.open()))) == 30
    code, out, _ = _run(["ensemble", "--n", "8", "--trials", "50", "--n-g", "60", "--allow-conjectured"])
    assert code == EXIT_OK
    result = _artifact(out)["result"]
    assert result["stats"]["trials"] == 50
    assert "conjectured" in result["averaged"]


def test_exit_invalid_inputs(tmp_path, bw4):
    bad = tmp_path / "bad.json"
    bad.write_text('{"N": 3, "q": 2, "layers": [[[0, 1], [1, 2]]]}')
    code, _, err = _run(["gap", "--arch", str(bad)])
    assert code == EXIT_INVALID and "overlapping" in err
    assert _run(["gap", "--arch", str(tmp_path / "missing.json")])[0] == EXIT_INVALID
    assert _run(["gap"])[0] == EXIT_INVALID
    assert _run(["nonsense"])[0] == EXIT_INVALID
    assert _run(["gap", "--arch", str(bw4), "--csv", str(tmp_path / "x.csv")])[0] == EXIT_INVALID
    assert _run(["gap", "--arch", str(bw4), "--layers", "0-1"])[0] == EXIT_INVALID


def test_exit_dimension_guard(bw4):
    assert _run(["gap", "--arch", str(bw4), "--dim-guard", "8"])[0] == EXIT_GUARD


def test_exit_nonconverged_writes_artifact(tmp_path, bw4):
    out = tmp_path / "gap.json"
    argv = ["gap", "--arch", str(bw4), "--method", "iterative", "--tol", "1e-30", "--max-matvecs", "3", "--out", str(out)]
    code, _, err = _run(argv)
    assert code == EXIT_NONCONVERGED
    assert "did not converge" in err
    assert json.loads(out.read_text())["result"]["report"]["converged"] is False


def test_help_exits_ok():
    assert _run(["--help"])[0] == EXIT_OK
