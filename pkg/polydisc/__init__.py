"""Truncated series, function spaces and cyclicity on the polydisc."""

# Version
try:
    from polydisc._version import version as __version__
except ImportError:  # pragma: no cover
    __version__ = "0+unknown"

# Imports
from polydisc.series import MultiIndex, Truncation, TruncatedSeries
from polydisc.series import Evaluator
from polydisc.spaces import SpaceSpec, QuadratureRule, parse_space
from polydisc.functionals import MomentFunctional
from polydisc.operators import OperatorMatrix, WCOSpec
from polydisc.graph import entry
from polydisc.objects import input_stage, stage
from polydisc.report import Report

__all__ = [
    "MultiIndex",
    "Truncation",
    "TruncatedSeries",
    "Evaluator",
    "SpaceSpec",
    "QuadratureRule",
    "parse_space",
    "MomentFunctional",
    "OperatorMatrix",
    "WCOSpec",
    "entry",
    "input_stage",
    "stage",
    "Report",
]
