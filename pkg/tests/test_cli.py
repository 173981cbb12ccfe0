import json

import pytest

from powercone.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_bounds(capsys):
    code, out = run(capsys, "bounds", "--alpha", "1,2,3")
    assert code == 0
    payload = json.loads(out)
    assert payload == {"lb": 3, "ub": 4}


def test_solve_writes_graph_and_dot(capsys, tmp_path):
    dot = tmp_path / "graph.dot"
    code, out = run(capsys, "solve", "--alpha", "1,2,3", "--dot", str(dot))
    assert code == 0
    payload = json.loads(out)
    assert payload["cardinality"] == 3
    assert payload["status"] == "optimal"
    assert payload["s"] == [1, 2, 3]
    assert len(payload["X"]) == 3
    assert dot.read_text().startswith("digraph")


def test_soc_output(capsys):
    code, out = run(capsys, "soc", "--alpha", "1,1")
    assert code == 0
    assert "x^2 <=" in out and "z_1" in out and "z_2" in out


def test_milp_emit_and_parse(capsys, tmp_path):
    lp = tmp_path / "model.lp"
    code, out = run(capsys, "milp", "emit", "--alpha", "1,2,3",
                    "--delta", "3", "--out", str(lp))
    assert code == 0
    manifest = json.loads(out)
    assert manifest["models"] == [{"delta": 3, "file": str(lp)}]
    text = lp.read_text()
    assert "Minimize" in text and "Binaries" in text

    sol = tmp_path / "model.sol"
    sol.write_text("\n".join([
        "z_4 1", "z_5 1",
        "x_4_0 2", "x_4_1 4", "x_5_0 4", "x_5_1 2",
        "y_0_4 1", "y_0_3 1", "y_4_5 1", "y_4_2 1", "y_5_4 1", "y_5_1 1",
    ]))
    code, out = run(capsys, "milp", "parse", "--alpha", "1,2,3",
                    "--delta", "3", "--sol", str(sol))
    assert code == 0
    payload = json.loads(out)
    assert len(payload["X"]) == 3


def test_milp_emit_auto_window(capsys, tmp_path):
    code, out = run(capsys, "milp", "emit", "--alpha", "1,2,3",
                    "--delta", "auto", "--out", str(tmp_path / "m.lp"))
    assert code == 0
    manifest = json.loads(out)
    assert [m["delta"] for m in manifest["models"]] == [2, 3]


def test_represent_verify_round_trip(capsys, tmp_path):
    prog = tmp_path / "prog.json"
    code, _ = run(capsys, "represent", "--p", "43/31", "--d1", "3",
                  "--alpha", "2,5,19", "--construction", "direct",
                  "--rationalize", "--supplier", "binary",
                  "--out", str(prog))
    assert code == 0
    code, out = run(capsys, "verify", "--program", str(prog),
                    "--mode", "sampling", "--trials", "10", "--seed", "1")
    assert code == 0
    payload = json.loads(out)
    assert payload["ok"] is True


def test_cover_pipeline(capsys, tmp_path):
    lp = tmp_path / "cover.lp"
    code, _ = run(capsys, "cover", "emit", "--demand", "3",
                  "--facilities", "2", "--p", "2", "--alpha", "2,5,19",
                  "--seed", "5", "--supplier", "binary", "--out", str(lp))
    assert code == 0
    assert "Maximize" in lp.read_text()
    code, out = run(capsys, "cover", "count", "--demand", "3",
                    "--facilities", "2", "--p", "2", "--alpha", "2,5,19",
                    "--seed", "5", "--supplier", "binary")
    assert code == 0
    payload = json.loads(out)
    assert payload["soc"] > 0 and payload["bin"] == 6


def test_bad_input_exit_code(capsys):
    code, _ = run(capsys, "bounds", "--alpha", "0,2")
    assert code == 2
    code, _ = run(capsys, "verify", "--program", "/nonexistent.json")
    assert code == 2


def test_verify_failure_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "vars": ["t", "a", "b"],
        "aux": [],
        "atoms": [{"kind": "soc3", "vars": ["t", "a", "b"]}],
        "blocks": [{
            "head": "t",
            "basis": ["a", "b"],
            "weights": [[1, 2], [1, 2]],
            "exponents": [["t", [[1, 3], [1, 2]]]],
            "atoms": [{"kind": "soc3", "vars": ["t", "a", "b"]}],
        }],
    }))
    code, out = run(capsys, "verify", "--program", str(bad))
    assert code == 1
    assert json.loads(out)["ok"] is False
