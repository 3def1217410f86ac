import json

import pytest

from curvlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_gen_round_trips_through_input(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "rope-ladder:3")
    assert code == 0
    path = tmp_path / "rope.json"
    path.write_text(out)
    code, doc = run_json(capsys, "betti", "--input", str(path))
    assert code == 0 and doc["betti1"] == 1


def test_gen_rejects_trivial_torus(capsys):
    code, _, err = run(capsys, "gen", "torus:4,8")
    assert code == 1 and "input error" in err


def test_curvature_ollivier_cycle(capsys):
    code, doc = run_json(capsys, "curvature", "ollivier", "--gen", "cycle:5")
    assert code == 0
    assert set(doc["values"].values()) == {"1/2"}
    assert doc["summary"]["positive"] == 5


def test_curvature_idle_needs_eps(capsys):
    with pytest.raises(SystemExit):
        main(["curvature", "idle", "--gen", "cycle:6"])
    capsys.readouterr()
    code, doc = run_json(capsys, "curvature", "idle", "--eps", "1/2", "--gen", "cycle:6")
    assert code == 0 and set(doc["values"].values()) == {"0"}


def test_curvature_idle_refuses_rates(capsys):
    code, _, err = run(capsys, "curvature", "idle", "--eps", "1/2", "--gen", "rope-ladder:3")
    assert code == 2 and "precondition" in err


def test_bakry_emery_vertex(capsys):
    code, doc = run_json(capsys, "curvature", "bakry-emery", "--gen", "complete:3", "--vertex", "0")
    assert code == 0 and abs(doc["K"] - 1.25) < 1e-12 and doc["residual"] <= 1e-9
    code, _, _ = run(capsys, "curvature", "bakry-emery", "--gen", "complete:3", "--vertex", "zz")
    assert code == 1


def test_betti_basis_and_cells(capsys):
    code, doc = run_json(capsys, "betti", "--gen", "rope-ladder:3", "--basis", "--cells")
    assert code == 0
    assert (doc["X0"], doc["X1"], doc["X2"]) == (9, 12, 3)
    assert len(doc["harmonic_basis"]) == 1
    assert "complex" in doc


def test_metric_file(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"edges": [{"u": "0", "v": "1", "d": "2"}]}))
    code, doc = run_json(capsys, "curvature", "ollivier", "--gen", "cycle:6", "--metric", str(path))
    assert code == 0 and doc["values"]["0~1"] == "3/4" and doc["values"]["2~3"] == "0"
    path.write_text(json.dumps({"edges": [{"u": "0", "v": "3", "d": "2"}]}))
    code, _, err = run(capsys, "curvature", "ollivier", "--gen", "cycle:6", "--metric", str(path))
    assert code == 1 and "non-edge" in err
    code, doc = run_json(capsys, "betti", "--gen", "cycle:6", "--metric", "combinatorial")
    assert doc["betti1"] == 1


def test_missing_input_file(capsys, tmp_path):
    code, _, _ = run(capsys, "betti", "--input", str(tmp_path / "nope.json"))
    assert code == 1


def test_flow_small_cycle_is_precondition(capsys):
    code, _, _ = run(capsys, "flow", "--gen", "cycle:4")
    assert code == 2


def test_flow_cycle_with_equivalence(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, doc = run_json(capsys, "flow", "--gen", "cycle:7", "--seed", "42", "--check-equivalence",
                         "--trace", str(trace))
    assert code == 0 and doc["converged"]
    assert doc["equivalence"]["agree"]
    assert trace.read_text().startswith("iteration")


def test_flow_c5_positive(capsys):
    code, doc = run_json(capsys, "flow", "--gen", "cycle:5", "--check-equivalence")
    eq = doc["equivalence"]
    assert code == 0 and doc["kappa_min"] > 0
    assert eq["agree"] and eq["betti1"] == 0 and not eq["zero_curvature"]


def test_flow_non_convergence(capsys):
    code, doc = run_json(capsys, "flow", "--gen", "cycle:6", "--seed", "3", "--max-iter", "2")
    assert code == 3 and not doc["converged"]


def test_check_predicates(capsys):
    code, doc = run_json(capsys, "check", "sharp", "--gen", "rope-ladder:6")
    assert code == 4 and doc["sharp_min"] and not doc["sharp_max"]
    code, doc = run_json(capsys, "check", "bone-idle", "--gen", "bi:6")
    assert code == 0 and doc["bone_idle"]
    code, doc = run_json(capsys, "check", "torus", "--gen", "torus:6,6")
    assert code == 0 and doc["torus"] and len(doc["structure"]["generators"]) == 2
    code, doc = run_json(capsys, "check", "obs-bone-idle", "--gen", "cycle:6")
    assert code == 0 and doc["agree"]


def test_check_bone_idle_on_rates_is_false(capsys):
    code, doc = run_json(capsys, "check", "bone-idle", "--gen", "rope-ladder:3")
    assert code == 4 and not doc["bone_idle"]


def test_check_torus_not_sharp(capsys):
    code, _, _ = run(capsys, "check", "torus", "--gen", "rope-ladder:4")
    assert code == 2


def test_check_negative_set(capsys):
    code, _, _ = run(capsys, "check", "negative-set", "--gen", "rope-ladder:4")
    assert code == 2
    code, doc = run_json(capsys, "check", "negative-set", "--gen", "rope-ladder:4", "--W", "a0")
    assert code == 0 and doc["holds"] and doc["betti1"] == 1


def test_out_file_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        code, out, _ = run(capsys, "curvature", "ollivier", "--gen", "random:8", "--seed", "5", "--out", str(p))
        assert code == 0 and out == ""
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, "curvature", "ollivier", "--gen", "random:8", "--seed", "5", "--threads", "3")
    assert out == a.read_text()
