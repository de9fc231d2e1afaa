from __future__ import annotations

import io
import json

import pytest

from treeflow.cli import run

K13 = {
    "n": 4, "terminals": [1, 2, 3],
    "edges": [{"u": 0, "v": s, "cap": 1, "cost": 1} for s in (1, 2, 3)],
    "demands": {"1": 1, "2": 1, "3": 1}, "problem": "N",
}


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


@pytest.mark.parametrize("algorithm", ["scaling", "descent"])
def test_solve_k13(tmp_path, algorithm):
    inst = write(tmp_path, "k13.json", K13)
    sol = str(tmp_path / "sol.json")
    code, text = call("solve", "--input", inst, "--algorithm", algorithm,
                      "--output", sol, "--verify")
    assert code == 0
    assert "value: 6 halves (3)" in text and "verified" in text
    doc = json.loads(open(sol).read())
    assert doc["value_halves"] == 6 and doc["certified"]
    assert all(p["lambda_halves"] == 1 for p in doc["paths"])
    # round trip
    code, text = call("verify", "--input", inst, "--solution", sol)
    assert code == 0 and "certified optimal" in text


def test_solve_prints_phase_summary(tmp_path):
    inst = write(tmp_path, "k13.json", K13)
    code, text = call("solve", "--input", inst)
    assert code == 0
    assert "phases:" in text and "max-flow computations:" in text


def test_verify_tampered_solution(tmp_path):
    inst = write(tmp_path, "k13.json", K13)
    sol = str(tmp_path / "sol.json")
    call("solve", "--input", inst, "--output", sol)
    doc = json.loads(open(sol).read())
    doc["paths"][0]["lambda_halves"] -= 1
    bad = write(tmp_path, "bad.json", doc)
    code, text = call("verify", "--input", inst, "--solution", bad)
    assert code == 1
    assert "violation:" in text and "NOT certified" in text


def test_verify_wrong_value(tmp_path):
    inst = write(tmp_path, "k13.json", K13)
    sol = str(tmp_path / "sol.json")
    call("solve", "--input", inst, "--output", sol)
    doc = json.loads(open(sol).read())
    doc["value_halves"] = 5
    code, text = call("verify", "--input", inst,
                      "--solution", write(tmp_path, "bad.json", doc))
    assert code == 1 and "value_halves" in text


def test_oracle(tmp_path):
    code, text = call("oracle", "--input", write(tmp_path, "k13.json", K13))
    assert code == 0 and "value: 6 halves (3)" in text


def test_oracle_too_large(tmp_path):
    loose = {"n": 3, "terminals": [0, 1, 2],
             "edges": [{"u": u, "v": v, "cap": 3, "cost": 1} for u, v in ((0, 1), (1, 2), (0, 2))],
             "demands": {"0": 1, "1": 1, "2": 1}}
    code, text = call("oracle", "--input", write(tmp_path, "loose.json", loose), "--budget", "2")
    assert code == 2 and "too large" in text


def test_infeasible_exit_code(tmp_path):
    inst = dict(K13, demands={"1": 2, "2": 1, "3": 1})
    code, text = call("solve", "--input", write(tmp_path, "inf.json", inst))
    assert code == 1 and "infeasible" in text
    code, text = call("oracle", "--input", write(tmp_path, "inf.json", inst))
    assert code == 1


def test_invalid_inputs(tmp_path):
    assert call("solve", "--input", str(tmp_path / "missing.json"))[0] == 2
    assert call("solve", "--input", write(tmp_path, "junk.json", "{nope"))[0] == 2
    assert call("solve", "--input", write(tmp_path, "short.json", {"n": 2}))[0] == 2
    bad_edge = dict(K13, edges=[{"u": 0, "v": 0, "cap": 1, "cost": 1}])
    assert call("solve", "--input", write(tmp_path, "loop.json", bad_edge))[0] == 2
    assert call("solve", "--input", write(tmp_path, "k.json", K13), "--bogus")[0] == 2
    assert call("solve", "--input", write(tmp_path, "k.json", K13),
                "--algorithm", "magic")[0] == 2
    assert call("frobnicate")[0] == 2
    assert call()[0] == 2


def test_multiway(tmp_path):
    inst = write(tmp_path, "mw.json", dict(K13, problem="MULTIWAY"))
    code, text = call("multiway", "--input", inst)
    assert code == 0
    assert "relaxation: 3 halves (1.5)" in text and "rounded cut: 4 halves (2)" in text
    code, text = call("solve", "--input", inst)
    assert code == 0 and "rounded cut" in text
    code, text = call("oracle", "--input", inst)
    assert code == 0 and "value: 4 halves (2)" in text


def test_mcmf(tmp_path):
    inst = write(tmp_path, "mcmf.json", dict(K13, problem="MCMF"))
    sol = str(tmp_path / "sol.json")
    code, text = call("solve", "--input", inst, "--output", sol, "--verify")
    assert code == 0 and "value: 6 halves (3)" in text
    doc = json.loads(open(sol).read())
    assert doc["flow_value_halves"] == 3
    assert call("verify", "--input", inst, "--solution", sol)[0] == 0


def test_ksubmod_min(tmp_path):
    terms = {"arities": [2, 2],
             "terms": [{"kind": "delta", "i": 0, "j": 1},
                       {"kind": "theta", "i": 0, "a": 1, "weight": "1"}],
             "offset": "0"}
    code, text = call("ksubmod-min", "--input", write(tmp_path, "t.json", terms))
    assert code == 0
    assert "point: [1, 1]" in text and "value: -2 halves (-1)" in text
    bad = {"arities": [2], "terms": [{"kind": "theta", "i": 0, "a": 7}]}
    assert call("ksubmod-min", "--input", write(tmp_path, "b.json", bad))[0] == 2


def test_lconvex_min(tmp_path):
    obj = {"tree": {"n": 5, "edges": [[0, 1], [1, 2], [2, 3], [3, 4]]}, "n": 1,
           "unary": [{"i": 0, "table": [4, 3, 2, 1, 0]}]}
    path = write(tmp_path, "obj.json", obj)
    code, text = call("lconvex-min", "--input", path,
                      "--start", write(tmp_path, "x0.json", {"x": [0]}))
    assert code == 0
    assert "point: [4]" in text and "steps: 4" in text
    assert call("lconvex-min", "--input", path,
                "--start", write(tmp_path, "x1.json", [9]))[0] == 2
    odd = dict(obj, n=2, pairs=[{"i": 0, "j": 1, "table": [0, 0, 1, 2, 3]}])
    assert call("lconvex-min", "--input", write(tmp_path, "odd.json", odd))[0] == 2


def test_gen_emits_feasible_instances(tmp_path):
    out = str(tmp_path / "g.json")
    assert call("gen", "--nodes", "6", "--terminals", "3", "--maxcap", "2",
                "--maxcost", "3", "--seed", "5", "--output", out)[0] == 0
    first = open(out).read()
    call("gen", "--nodes", "6", "--terminals", "3", "--maxcap", "2",
         "--maxcost", "3", "--seed", "5", "--output", out)
    assert open(out).read() == first
    code, text = call("solve", "--input", out, "--verify")
    assert code == 0
    assert call("gen", "--nodes", "2", "--terminals", "3")[0] == 2
