import io
import json
import subprocess
import sys

import numpy as np
import pytest

from sqc.cli import (
    EXIT_INPUT,
    EXIT_USAGE,
    GENERATORS,
    emit_problem,
    generate_example,
    main,
    parse_problem,
    problem_from_dict,
    run,
)
from sqc.errors import InvalidInputError, ParseError

TWO_EIG_POS = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]


def doc(**over):
    d = {"n": 3, "matrix": TWO_EIG_POS, "cone": {"type": "lorentz"}, "options": {"oracle_samples": 2000}}
    d.update(over)
    return d


def write(tmp_path, obj, name="p.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


# -- parsing ----------------------------------------------------------------

def test_parse_roundtrip(tmp_path):
    prob = parse_problem(write(tmp_path, doc()))
    assert prob.n == 3 and prob.cone.kind == "lorentz" and prob.options.oracle_samples == 2000
    again = parse_problem(io.StringIO(emit_problem(prob)))
    np.testing.assert_array_equal(again.matrix, prob.matrix)
    assert again.options == prob.options


@pytest.mark.parametrize("bad,msg", [
    ({"matrix": TWO_EIG_POS}, "cone"),
    (doc(matrix=[[1.0, 2.0], [3.0]]), "3x3"),
    (doc(matrix=[[1, 0, 0], [0, "x", 0], [0, 0, 1]]), "[1][1]"),
    (doc(cone={"type": "psd"}), "unknown cone"),
    (doc(cone={"type": "lorentz", "n": 4}), "does not match"),
    (doc(options={"bogus": 1}), "unknown options"),
    (doc(options={"tol": -1.0}), "tol"),
    (doc(n=1), "'n'"),
])
def test_parse_errors(bad, msg):
    with pytest.raises(ParseError) as ei:
        problem_from_dict(bad)
    assert msg in str(ei.value)


def test_json_error_reports_location(tmp_path):
    with pytest.raises(ParseError) as ei:
        parse_problem(write(tmp_path, '{\n  "n": 3,\n  "matrix": [1, 2,,]\n}'))
    assert ":3:" in str(ei.value) and '"matrix"' in str(ei.value)


def test_asymmetric_input_warns():
    with pytest.warns(UserWarning, match="asymmetry"):
        prob = problem_from_dict(doc(matrix=[[0, 1, 0], [0, 1, 0], [0, 0, 1]]))
    assert prob.matrix[0, 1] == 0.5 and prob.metadata["warnings"]


def test_missing_file():
    with pytest.raises(ParseError, match="cannot read"):
        parse_problem("/nonexistent/problem.json")


# -- run --------------------------------------------------------------------

def test_run_modes():
    prob = problem_from_dict(doc())
    code, rep = run(prob, "analyze")
    assert code == 0 and rep["verdict"] == "CERTIFIED_QUASICONVEX" and "oracle_summary" in rep["analysis"]
    assert rep["analysis"]["oracle_summary"] is None
    code, rep = run(prob, "both")
    assert code == 0 and rep["analysis"]["oracle_summary"]["geodesic"]["status"] == "NO_VIOLATION"
    code, rep = run(prob, "oracle")
    assert code == 2 and set(rep["oracle"]) == {"geodesic", "pairwise", "sublevel"}
    with pytest.raises(InvalidInputError):
        run(prob, "fast")


def test_run_oracle_only_refutes():
    code, rep = run(generate_example("two-eig-lorentz-neg", 3), "oracle")
    assert code == 1 and rep["basis"].startswith("ORACLE_")


# -- generators -------------------------------------------------------------

@pytest.mark.parametrize("name", GENERATORS)
def test_generators_match_expected(name):
    prob = generate_example(name, 4, seed=3)
    code, rep = run(prob, "analyze")
    assert rep["verdict"] == prob.metadata["expected_verdict"], rep.get("summary")


def test_generator_seed_is_symmetry():
    a = generate_example("countergg-lorentz", 4)
    b = generate_example("countergg-lorentz", 4, seed=8)
    np.testing.assert_allclose(np.linalg.eigvalsh(a.matrix), np.linalg.eigvalsh(b.matrix), atol=1e-12)
    assert b.metadata["generator_seed"] == 8


def test_generator_errors():
    with pytest.raises(InvalidInputError):
        generate_example("nope", 3)
    with pytest.raises(InvalidInputError):
        generate_example("countergg-lorentz", 2)


# -- main -------------------------------------------------------------------

def test_main_gen_and_analyze(tmp_path, capsys):
    out = str(tmp_path / "g.json")
    assert main(["gen", "--name", "householder", "--n", "3", "--output", out]) == 0
    report = str(tmp_path / "r.json")
    code = main(["analyze", "--input", out, "--mode", "analyze", "--report", report])
    assert code == 0
    assert "verdict: CERTIFIED_QUASICONVEX" in capsys.readouterr().out
    assert json.loads(open(report).read())["exit_code"] == 0


def test_main_json_and_overrides(tmp_path, capsys):
    path = write(tmp_path, doc(matrix=[[1, 0, 0], [0, 0, 0], [0, 0, 1]]))
    code = main(["analyze", "--input", path, "--json", "--seed", "3", "--samples", "1500", "--mode", "analyze"])
    rep = json.loads(capsys.readouterr().out)
    assert code == 1 and rep["analysis"]["provenance"]["seed"] == 3
    assert rep["analysis"]["provenance"]["options"]["oracle_samples"] == 1500


def test_main_error_codes(tmp_path, capsys):
    assert main(["analyze", "--input", write(tmp_path, "{not json")]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as ei:
        main(["analyze"])
    assert ei.value.code == EXIT_USAGE
    assert main(["project", "--vector", "1,a"]) == EXIT_INPUT


def test_main_project(capsys):
    assert main(["project", "--cone", "lorentz", "--vector", "1,2,0"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d == {"plus": [1.5, 1.5, 0.0], "minus": [0.5, -0.5, 0.0], "abs": [2.0, 1.0, 0.0]}


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "sqc.cli", "gen", "--name", "two-eig-lorentz-pos", "--n", "3"],
                       capture_output=True, text=True, check=True)
    assert json.loads(r.stdout)["metadata"]["expected_verdict"] == "CERTIFIED_QUASICONVEX"


def test_stdin_input(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(doc())))
    assert main(["analyze", "--input", "-", "--mode", "analyze"]) == 0
