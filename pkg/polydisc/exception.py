"""Provide the error hierarchy and helpers for exception handling."""

# Imports

import sys
import traceback
from contextlib import contextmanager


# Exit codes

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# Base error


class PolydiscError(Exception):
    """Base class for the errors raised by the workbench.

    Args:
        desc (str): Human readable description.
        reason (str): Short machine readable code. Defaults to the class
            default reason.
        **details: Extra diagnostics (locations, condition numbers...)
            stored in the ``details`` dictionary.
    """

    reason = "PolydiscError"
    exit_code = EXIT_NUMERICAL

    def __init__(self, desc, reason=None, **details):
        super(PolydiscError, self).__init__(desc)
        self.desc = desc
        if reason is not None:
            self.reason = reason
        self.details = details

    def __str__(self):
        return self.desc


# Configuration errors


class ConfigError(PolydiscError, ValueError):
    reason = "ConfigError"
    exit_code = EXIT_CONFIG


class ParseError(ConfigError):
    reason = "ParseError"


class DimensionError(ConfigError):
    reason = "DimensionMismatch"


class PreconditionError(ConfigError):
    reason = "PreconditionViolated"


# Numerical errors


class NumericalError(PolydiscError, ArithmeticError):
    reason = "NumericalFailure"
    exit_code = EXIT_NUMERICAL


class SingularGramError(NumericalError):
    reason = "SingularGram"


class NonVanishingViolation(NumericalError):
    reason = "NonVanishingViolation"


class StepTooCoarse(NumericalError):
    reason = "StepTooCoarse"


class FitFailed(NumericalError):
    reason = "FitFailed"


class InsufficientCapError(NumericalError):
    reason = "InsufficientCap"


class DivisionError(NumericalError):
    reason = "DivisionUndefined"


class OverflowColumnsError(NumericalError):
    reason = "OverflowColumns"


# Safe traceback string


def traceback_string(exc, limit=None):
    if getattr(exc, "__traceback__", None):
        return "".join(traceback.format_tb(exc.__traceback__, limit=limit))
    if any(sys.exc_info()):
        return traceback.format_exc(limit=limit)
    return ""


# Safe exception representation


def exception_string(exc, wrap=None):
    try:
        base = exc.desc
    except AttributeError:
        base = str(exc) if str(exc) else repr(exc)
    # No wrapping
    if not wrap:
        return base
    # Wrapping
    indented = "\n".join("  " + line for line in base.splitlines())
    return "{}:\n{}".format(wrap, indented)


# Exception context


class ContextException(Exception):
    def __init__(self, base, context, origin, traceback):
        super(ContextException, self).__init__(base, context, origin)
        self.base = base
        self.context = context
        self.origin = origin
        self.__traceback__ = traceback

    @property
    def desc(self):
        wrap = "Exception while {} {}".format(self.context, self.origin)
        return exception_string(self.base, wrap)

    @property
    def root(self):
        base = self.base
        while isinstance(base, ContextException):
            base = base.base
        return base

    def __str__(self):
        return self.desc


# Exception context manager


@contextmanager
def context(msg, origin):
    try:
        yield
    except Exception as exc:
        _, _, tb = sys.exc_info()
        raise ContextException(exc, msg, origin, tb)


# Error report conversion


def exit_code_for(exc):
    if isinstance(exc, ContextException):
        exc = exc.root
    return getattr(exc, "exit_code", EXIT_NUMERICAL)


def error_payload(exc):
    """Return a JSON-ready description of an exception."""
    root = exc.root if isinstance(exc, ContextException) else exc
    details = getattr(root, "details", {})
    return {
        "reason": getattr(root, "reason", type(root).__name__),
        "desc": exception_string(exc),
        "exit_code": exit_code_for(exc),
        "details": {key: repr(value) for key, value in details.items()},
        "traceback": traceback_string(exc),
    }
