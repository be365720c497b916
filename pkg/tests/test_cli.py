"""Contain the tests for the command line front end."""

# Imports
import json

import pytest

from polydisc import cli
from polydisc.cyclicity import CYCLIC, OUTER, NOT_OUTER
from polydisc.exception import EXIT_CONFIG, EXIT_NUMERICAL


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def payload(err):
    return json.loads(err[err.index("{\n"):])


def test_norm(capsys):
    code, out, _ = run(capsys, "norm", "monomial:alpha=1,1", "--space",
                       "da:n=2", "--degree-max", "2")
    assert code == 0
    data = json.loads(out)
    assert data["tool"]["name"] == "polydisc"
    assert data["command"] == "norm"
    norm = data["stages"]["norm"]
    assert norm["value"] == pytest.approx(0.7071067811865476)
    assert norm["quality"] == "VALID"
    assert "function" not in data["stages"]
    assert data["stages"]["p_profile"]["flags"] == ["not-requested"]
    assert data["stages"]["gram_health"]["value"]["size"] == 6
    assert data["config"]["space"] == "da:n=2"
    assert data["tolerances"]["outer"] == 1e-3


def test_deterministic_output(capsys):
    argv = ("cyclicity", "factor:beta=2", "--degree-max", "4", "--p", "2")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0
    assert first[1] == second[1]
    data = json.loads(first[1])
    assert data["stages"]["curve"]["value"]["verdict"] == CYCLIC
    assert data["stages"]["p_residual"]["value"] < 0.1


def test_curve_csv(capsys, tmp_path):
    path = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "cyclicity", "factor:beta=2", "--degree-max",
                       "4", "--format", "csv", "--out", str(path))
    assert code == 0
    assert out == ""
    lines = path.read_text().splitlines()
    assert lines[0] == "N,d_N,cond"
    assert [line.split(",")[0] for line in lines[1:]] == [
        "0", "1", "2", "3", "4"]


def test_gram_csv(capsys):
    code, out, _ = run(capsys, "norm", "factor:beta=2", "--degree-max", "1",
                       "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == 'basis,"1*f","z1*f"'
    assert len(lines) == 3


def test_outer_builtins(capsys):
    code, out, _ = run(capsys, "outer", "rudin-outer-2d", "--radii",
                       "0.5,0.9", "--nodes", "64")
    assert code == 0
    outer = json.loads(out)["stages"]["outer"]
    assert outer["value"]["verdict"] == OUTER
    assert outer["value"]["lhs"] == pytest.approx(-1)
    code, out, _ = run(capsys, "outer", "rudin-image-1d", "--radii",
                       "0.5,0.9")
    assert code == 0
    assert json.loads(out)["stages"]["outer"]["value"]["verdict"] == (
        NOT_OUTER)


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "point:b=0.3,-0.2", "--cap", "6")
    assert code == 0
    stages = json.loads(out)["stages"]
    assert stages["classification"]["value"]["verdict"] == "PointEvaluation"
    assert stages["classification"]["flags"] == []
    assert stages["domain"]["value"]["inside"]
    # Outside the closed polydisc
    code, out, _ = run(capsys, "classify", "point:b=1.5", "--cap", "6")
    assert code == 0
    stages = json.loads(out)["stages"]
    assert stages["classification"]["flags"] == ["b-outside-polydisc"]
    # Not a point evaluation
    code, out, _ = run(capsys, "classify", "average:points=0.5|-0.5",
                       "--cap", "24")
    stages = json.loads(out)["stages"]
    assert stages["classification"]["value"]["verdict"] == "VanishingWitness"
    assert stages["domain"]["flags"] == ["no-point"]


def test_wco_average(capsys):
    code, out, _ = run(capsys, "wco", "average", "--degree-max", "6")
    assert code == 0
    stages = json.loads(out)["stages"]
    assert stages["verdict"]["value"] == "NOT-WCO"
    assert stages["verification"]["value"]["value"] == pytest.approx(0.25)
    assert stages["norms"]["value"]["norms"] == pytest.approx([1, 1, 1])
    code, out, _ = run(capsys, "wco", "rudin", "--space", "h2:n=2",
                       "--cap", "6", "--degree-max", "4", "--w", "0,0")
    assert code == 0
    assert json.loads(out)["stages"]["verdict"]["value"] == "WCO"


def test_factor(capsys):
    code, out, _ = run(capsys, "factor", "exp-z2", "--m", "2", "--growth",
                       "1,1")
    assert code == 0
    stages = json.loads(out)["stages"]
    assert stages["fit"]["value"]["certificate"] == "CONFIRMED"
    assert stages["growth"]["value"]["holds"]
    assert stages["schwarz"]["value"]["holds"]
    code, out, _ = run(capsys, "factor", "exp-z3", "--m", "2")
    assert code == 0
    stages = json.loads(out)["stages"]
    assert stages["fit"]["value"]["certificate"] == "REFUTED"
    assert stages["growth"]["flags"] == ["not-requested"]


def test_config_errors(capsys):
    code, out, err = run(capsys, "norm", "one", "--space", "bergman:n=1")
    assert code == EXIT_CONFIG
    assert out == ""
    assert payload(err)["reason"] == "ParseError"
    code, _, err = run(capsys, "norm", "one:n=2", "--space", "h2:n=1")
    assert code == EXIT_CONFIG
    assert payload(err)["reason"] == "DimensionMismatch"
    code, _, err = run(capsys, "outer", "const-5", "--format", "csv")
    assert code == EXIT_CONFIG
    code, _, err = run(capsys, "factor", "exp-z2")
    assert code == EXIT_CONFIG
    code, _, err = run(capsys, "norm", "one", "--tol", "bogus=1")
    assert code == EXIT_CONFIG
    code, _, err = run(capsys, "norm", "one", "--radii", "0.5,2")
    assert code == EXIT_CONFIG


def test_argument_errors(capsys):
    code, out, err = run(capsys, "norm", "monomial:alpha=1,1", "--cap", "x")
    assert code == EXIT_CONFIG
    assert out == ""
    data = payload(err)
    assert data["reason"] == "ParseError"
    assert data["exit_code"] == EXIT_CONFIG
    assert "--cap" in data["desc"]
    assert "usage: polydisc norm" in data["details"]["usage"]
    # Missing input and unknown command
    code, _, err = run(capsys, "norm")
    assert code == EXIT_CONFIG
    assert payload(err)["reason"] == "ParseError"
    code, _, err = run(capsys, "bergman", "one")
    assert code == EXIT_CONFIG
    assert payload(err)["reason"] == "ParseError"
    # Help still exits cleanly
    with pytest.raises(SystemExit) as context:
        cli.main(["--help"])
    assert context.value.code == 0


def test_numerical_errors(capsys):
    code, out, err = run(capsys, "factor", "exp-z3", "--m", "2",
                         "--degree", "2")
    assert code == EXIT_NUMERICAL
    assert out == ""
    assert payload(err)["reason"] == "FitFailed"
    code, _, err = run(capsys, "outer", "monomial:alpha=1")
    assert code == EXIT_CONFIG
    assert payload(err)["reason"] == "ZeroAtOrigin"
