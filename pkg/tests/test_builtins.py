"""Contain the tests for the named corpus and the descriptors."""

# Imports
import json
import math

import numpy
import pytest

from polydisc import builtins
from polydisc.series import Truncation, TruncatedSeries, Evaluator
from polydisc.operators import OperatorMatrix, recover_wco
from polydisc.exception import ParseError, DimensionError


def test_evaluators():
    f = builtins.evaluator(" Rudin-Outer-2D")
    assert isinstance(f, Evaluator)
    assert f.name == "rudin-outer-2d"
    assert f.n == 2
    origin = numpy.zeros((1, 2))
    assert f.log_modulus(origin) == pytest.approx([-1])
    assert f.evaluate(origin) == pytest.approx([math.exp(-1)])
    # Image of the outer function under z -> ((1 + z) / 2, (1 + z) / 2)
    g = builtins.evaluator("rudin-image-1d")
    assert g.log_modulus(numpy.zeros((1, 1))) == pytest.approx([-3])
    constant = builtins.evaluator("const-5")
    assert constant.log_func is None
    assert constant.log_modulus([[0.3]]) == pytest.approx([math.log(5)])
    assert builtins.evaluator("exp-z3")(2) == pytest.approx(math.exp(8))
    with pytest.raises(ParseError):
        builtins.evaluator("rudin")


def test_series_descriptors():
    one = builtins.series("one:n=2", 3)
    assert one.trunc == Truncation(2, 3)
    assert one.coefficient((0, 0)) == 1
    monomial = builtins.series("monomial:alpha=1,2", 3)
    assert monomial.n == 2
    assert monomial.coefficient((1, 2)) == 1
    factor = builtins.series("factor:n=2:i=2:beta=1.5", 2)
    assert factor((0, 2)) == pytest.approx(0.5)
    assert factor.coefficient((0, 1)) == 1
    exp = builtins.series("exp:w=1", 10)
    assert exp.coefficient((3,)) == pytest.approx(1 / 6)
    assert builtins.series("exp:w=1,2i", 2).coefficient((0, 1)) == 2j
    with pytest.raises(ParseError):
        builtins.series("monomial:alpha=3,1", 3)
    with pytest.raises(DimensionError):
        builtins.series("factor:n=2:i=3", 2)
    with pytest.raises(ParseError):
        builtins.series("one:n=2:x=1", 2)
    with pytest.raises(ParseError):
        builtins.series("one:extra", 2)
    with pytest.raises(ParseError):
        builtins.series("bogus", 2)


def test_function_resolution():
    assert isinstance(builtins.function("exp-z", 4), Evaluator)
    assert isinstance(builtins.function("one", 4), TruncatedSeries)


def test_series_file(tmp_path):
    trunc = Truncation(1, 2)
    f = 1 + 2j * TruncatedSeries.variable(trunc, 0)
    path = tmp_path / "f.json"
    path.write_text(json.dumps(f.to_json()))
    assert builtins.series(str(path), 8).allclose(f)
    path.write_text("{")
    with pytest.raises(ParseError):
        builtins.series(str(path), 8)
    with pytest.raises(ParseError):
        builtins.series(str(tmp_path / "missing.json"), 8)


def test_functional_descriptors():
    point = builtins.functional("point:b=0.2,0.4:a=3", 3)
    assert point.n == 2
    assert point.moment((1, 0)) == pytest.approx(0.6)
    average = builtins.functional("average:points=0.5|-0.5", 4)
    assert average.moment((1,)) == 0
    assert average.moment((2,)) == pytest.approx(0.25)
    weighted = builtins.functional(
        "average:points=1|-1:weights=0.75,0.25", 2)
    assert weighted.moment((1,)) == pytest.approx(0.5)
    boundary = builtins.functional("boundary:n=2", 3)
    assert boundary.moment((2, 1)) == 1
    with pytest.raises(ParseError):
        builtins.functional("average:points=0.5|0.5,0.5", 2)
    with pytest.raises(ParseError):
        builtins.functional("average:points=1|-1:weights=1", 2)
    with pytest.raises(ParseError):
        builtins.functional("point:b=", 2)
    with pytest.raises(ParseError):
        builtins.functional("dirac:b=1", 2)


def test_operator_descriptors():
    z = TruncatedSeries.variable(Truncation(1, 3), 0)
    identity = builtins.operator("identity", 3, "h2:n=1")
    assert isinstance(identity, OperatorMatrix)
    assert numpy.allclose(identity.entries, numpy.eye(4))
    shift = builtins.operator("shift:i=1", 3, "h2:n=1")
    assert shift.apply(1 + z).allclose(z + z * z)
    rudin = builtins.operator("rudin", 3, "h2:n=2")
    assert rudin.domain == Truncation(2, 3)
    average = builtins.operator("average", 4, "hardy:n=1")
    assert average.column((2,)).coefficient((2,)) == pytest.approx(0.25)
    with pytest.raises(ParseError):
        builtins.operator("wco:a.json", 3, "h2:n=1")
    with pytest.raises(ParseError):
        builtins.operator("shift:i=1:j=2", 3, "h2:n=1")
    with pytest.raises(ParseError):
        builtins.operator("volterra", 3, "h2:n=1")
    with pytest.raises(ParseError):
        builtins.operator("identity", 3, "bergman:n=1")


def test_wco_files(tmp_path):
    trunc = Truncation(1, 4)
    z = TruncatedSeries.variable(trunc, 0)
    a_path, b_path = tmp_path / "a.json", tmp_path / "b.json"
    a_path.write_text(json.dumps((1 + z / 2).to_json()))
    b_path.write_text(json.dumps({"b": [(z / 3).to_json()]}))
    operator = builtins.operator(
        "wco:{}:{}".format(a_path, b_path), 2, "h2:n=1")
    assert operator.domain == Truncation(1, 2)
    assert operator.codomain == Truncation(1, 4)
    recovered = recover_wco(operator)
    assert recovered.a.allclose(1 + z / 2)
    assert recovered.b[0].allclose(z / 3)
    # A bare component is accepted as a one-variable symbol
    b_path.write_text(json.dumps((z / 3).to_json()))
    operator = builtins.operator(
        "wco:{}:{}".format(a_path, b_path), 2, "h2:n=1")
    assert operator.column((1,)).allclose((1 + z / 2) * z / 3)
    b_path.write_text(json.dumps("z"))
    with pytest.raises(ParseError):
        builtins.operator("wco:{}:{}".format(a_path, b_path), 2, "h2:n=1")
