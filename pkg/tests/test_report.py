"""Contain the tests for the report objects."""

# Imports
import json
import collections

import pytest

# Report imports
from polydisc import __version__
from polydisc.graph import entry, FLAGGED, INVALID
from polydisc.objects import input_stage, stage
from polydisc.report import Report
from polydisc.exception import ContextException, DivisionError
from polydisc.exception import exit_code_for
from polydisc.utils import tolerances

Config = collections.namedtuple("Config", "x y tolerances")


def config(x=21.0, y=7.0):
    return Config(x, y, tolerances())


class Ratio(Report):
    command = "ratio"

    @input_stage()
    def x(self):
        return self.config.x

    @input_stage()
    def y(self):
        """Denominator."""
        if self.config.y == 0:
            raise DivisionError("Zero denominator")
        return self.config.y

    @stage(bind=["x", "y"])
    def ratio(self, x, y):
        return x / y

    @stage(bind=["ratio"])
    def rounded(self, ratio):
        return entry(round(ratio), ("rounded",))


def test_simple_report():
    report = Ratio(config()).run()
    assert not report.failed
    assert report.first_exception() is None
    assert report.result("ratio") == 3
    results = report.results()
    assert list(results) == ["x", "y", "ratio", "rounded"]
    assert results["rounded"] == entry(3, ("rounded",))
    assert results["rounded"].quality == FLAGGED
    assert repr(report) == "report <ratio>"
    assert report.graph["y"].description == "Denominator."


def test_report_failure():
    report = Ratio(config(y=0)).run()
    assert report.failed
    exc = report.first_exception()
    assert isinstance(exc, ContextException)
    assert isinstance(exc.root, DivisionError)
    assert exit_code_for(exc) == 3
    assert "Exception while computing node <y>" in str(exc)
    # Forwarded to the dependent stages
    with pytest.raises(ContextException) as context:
        report.result("rounded")
    assert "updating node <rounded>" in str(context.value)
    # Recorded once
    data = report.to_dict()
    assert list(data["errors"].values()) == [1]
    assert data["stages"]["ratio"]["flags"] == ["failed"]
    assert data["stages"]["x"]["value"] == 21.0


def test_stage_exception_history():
    report = Ratio(config(x="a")).run()
    assert report.failed
    assert isinstance(report.first_exception().root, TypeError)
    errors = report.to_dict()["errors"]
    assert len(errors) == 1
    assert "updating node <ratio>" in list(errors)[0]


def test_inheritance():
    class Inverse(Ratio):
        command = "inverse"
        rounded = None

        @stage(bind=["ratio"])
        def inverse(self, ratio):
            return 1 / ratio

    report = Inverse(config()).run()
    assert list(report.results()) == ["x", "y", "ratio", "inverse"]
    assert report.result("inverse") == pytest.approx(1 / 3)
    # Base class untouched
    assert "rounded" in Ratio._class_dict


def test_invalid_propagation():
    class Optional(Report):
        command = "optional"

        @input_stage()
        def x(self):
            return entry(None, ("not-requested",))

        @stage(bind=["x"])
        def double(self, x):
            raise AssertionError("Not called")

    report = Optional(config()).run()
    assert not report.failed
    result = report.results()["double"]
    assert result.quality == INVALID
    assert result.flags == ("not-requested",)


def test_custom_aggregation():
    class Custom(Ratio):
        @stage(bind=["x", "y"], standard_aggregation=False)
        def names(self, x, y):
            return [x.name, y.name]

    report = Custom(config()).run()
    assert report.result("names") == ["x", "y"]


def test_wrong_stage():
    class Unbound(Report):
        command = "unbound"
        value = stage(bind=["missing"])

    with pytest.raises(ContextException) as context:
        Unbound(config()).run()
    assert "No update method" in str(context.value)


def test_deterministic_json():
    first = Ratio(config()).to_json()
    second = Ratio(config()).run().to_json()
    assert first == second
    data = json.loads(first)
    assert data["tool"] == {"name": "polydisc", "version": __version__}
    assert data["command"] == "ratio"
    assert data["tolerances"]["outer"] == 1e-3
    assert data["stages"]["ratio"] == {
        "value": 3.0, "flags": [], "quality": "VALID"}
    assert data["stages"]["rounded"]["quality"] == "FLAGGED"
    assert data["errors"] == {}


def test_csv_not_available():
    with pytest.raises(Exception) as context:
        Ratio(config()).run().to_csv()
    assert exit_code_for(context.value) == 2
