"""Named corpus of functions, series, functionals and operators.

Every input of the command line is either a JSON file or a descriptor
``name:key=value:...`` resolved here.
"""

# Imports

import numpy

from polydisc.series import (
    Truncation, TruncatedSeries, MultiIndex, Evaluator, exp_linear)
from polydisc.spaces import SpaceSpec, parse_space
from polydisc.functionals import MomentFunctional
from polydisc.operators import (
    OperatorMatrix, WCOSpec, wco_matrix, shift_matrix, identity_operator,
    rudin_operator, averaging_operator)
from polydisc.exception import ParseError, DimensionError
from polydisc.utils import (
    parse_descriptor, parse_int, parse_complex, parse_complex_list,
    load_json)


# Closed-form evaluators

def _rudin_outer_exponent(z):
    u = z[:, 0] + z[:, 1]
    return (u + 2) / (u - 2)


def _rudin_image_exponent(z):
    return (z[:, 0] + 3) / (z[:, 0] - 1)


def _exponential(exponent):
    # (func, log_func) of exp(exponent)
    return (lambda z: numpy.exp(exponent(z)),
            lambda z: exponent(z).real)


EVALUATORS = {
    "rudin-outer-2d": (2,) + _exponential(_rudin_outer_exponent),
    "rudin-image-1d": (1,) + _exponential(_rudin_image_exponent),
    "exp-z": (1,) + _exponential(lambda z: z[:, 0]),
    "exp-z2": (1,) + _exponential(lambda z: z[:, 0] ** 2),
    "exp-z3": (1,) + _exponential(lambda z: z[:, 0] ** 3),
    "exp-z1z2": (2,) + _exponential(lambda z: z[:, 0] * z[:, 1]),
    "const-5": (1, lambda z: numpy.full(len(z), 5.0 + 0j), None),
}


def evaluator(name):
    key = name.strip().lower()
    try:
        n, func, log_func = EVALUATORS[key]
    except KeyError:
        raise ParseError("Unknown built-in function {!r} (known: {})".format(
            name, ", ".join(sorted(EVALUATORS))))
    return Evaluator(key, n, func, log_func)


# Helpers

def is_path(text):
    # Descriptors such as wco:a.json:b.json also end with .json
    text = text.strip().lower()
    return text.endswith(".json") and not text.startswith("wco:")


def _check_keys(name, kwargs, allowed, text):
    unknown = set(kwargs) - set(allowed)
    if unknown:
        raise ParseError("Unknown keys {} for {} in {!r}".format(
            sorted(unknown), name, text))


def _parse_point(value, name):
    point = parse_complex_list(value, name)
    if not point:
        raise ParseError("Empty {} in descriptor".format(name))
    return point


# Series descriptors


def series(text, cap):
    """Resolve a series descriptor or JSON file.

    Descriptors: ``one:n=2``, ``monomial:alpha=1,2``,
    ``factor:n=2:i=1:beta=1.5`` (z_i - beta, 1-based i) and
    ``exp:w=1,1`` (the exponential of w . z truncated at the cap).
    """
    if is_path(text):
        return TruncatedSeries.from_json(load_json(text))
    name, args, kwargs = parse_descriptor(text)
    if args:
        raise ParseError("Unexpected fields {} in {!r}".format(args, text))
    if name == "one":
        _check_keys(name, kwargs, ("n",), text)
        n = parse_int(kwargs.get("n", 1), "n")
        return TruncatedSeries.one(Truncation(n, cap))
    if name == "monomial":
        _check_keys(name, kwargs, ("alpha",), text)
        alpha = MultiIndex(parse_int(x, "alpha")
                           for x in kwargs.get("alpha", "").split(",") if x)
        if alpha.order > cap:
            raise ParseError("Monomial {} above cap {}".format(
                list(alpha), cap))
        return TruncatedSeries.monomial(Truncation(alpha.n, cap), alpha)
    if name == "factor":
        _check_keys(name, kwargs, ("n", "i", "beta"), text)
        n = parse_int(kwargs.get("n", 1), "n")
        i = parse_int(kwargs.get("i", 1), "i")
        if not 1 <= i <= n:
            raise DimensionError("No variable z{} among {}".format(i, n))
        beta = parse_complex(kwargs.get("beta", "0"), "beta")
        trunc = Truncation(n, max(cap, 1))
        return TruncatedSeries.variable(trunc, i - 1) - beta
    if name == "exp":
        _check_keys(name, kwargs, ("w",), text)
        w = _parse_point(kwargs.get("w", ""), "w")
        return exp_linear(Truncation(len(w), cap), w)
    raise ParseError("Unknown series descriptor {!r}".format(text))


def function(text, cap):
    """Built-in evaluator, or a series for anything else."""
    name = text.strip().lower()
    if name in EVALUATORS:
        return evaluator(name)
    return series(text, cap)


# Functionals


def functional(text, cap):
    """Resolve a moments file or a functional descriptor.

    Descriptors: ``point:b=0.2,0.4:a=3``, ``average:points=0.5|-0.5``
    (mean of the evaluations, points separated by ``|``, optional
    ``weights``) and ``boundary:n=1`` (evaluation at (1, ..., 1)).
    """
    if is_path(text):
        return MomentFunctional.from_json(load_json(text))
    name, args, kwargs = parse_descriptor(text)
    if args:
        raise ParseError("Unexpected fields {} in {!r}".format(args, text))
    if name == "point":
        _check_keys(name, kwargs, ("a", "b"), text)
        b = _parse_point(kwargs.get("b", ""), "b")
        a = parse_complex(kwargs.get("a", "1"), "a")
        return MomentFunctional.point(Truncation(len(b), cap), b, a)
    if name == "average":
        _check_keys(name, kwargs, ("points", "weights"), text)
        points = [_parse_point(x, "points")
                  for x in kwargs.get("points", "").split("|") if x]
        if not points or len(set(map(len, points))) != 1:
            raise ParseError("Points of {!r} must share one dimension".format(
                text))
        weights = [1.0 / len(points)] * len(points)
        if "weights" in kwargs:
            weights = parse_complex_list(kwargs["weights"], "weights")
            if len(weights) != len(points):
                raise ParseError("{} weights for {} points".format(
                    len(weights), len(points)))
        trunc = Truncation(len(points[0]), cap)
        return MomentFunctional.averaging(trunc, points, weights)
    if name == "boundary":
        _check_keys(name, kwargs, ("n",), text)
        n = parse_int(kwargs.get("n", 1), "n")
        return MomentFunctional.point(Truncation(n, cap), (1.0,) * n)
    raise ParseError("Unknown functional descriptor {!r}".format(text))


# Operators


def _symbol(data):
    if isinstance(data, dict) and "b" in data:
        data = data["b"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise ParseError("Malformed symbol JSON")
    return [TruncatedSeries.from_json(component) for component in data]


def wco_operator(a_path, b_path, cap, space):
    """Weighted composition operator from weight and symbol files.

    The weight fixes the codomain variables; the symbol components fix
    the domain variables. Both sides use the kind of ``space``.
    """
    a = TruncatedSeries.from_json(load_json(a_path))
    b = _symbol(load_json(b_path))
    target = Truncation(a.n, max(cap, a.degree_cap))
    b = [component.lift(target.degree_cap) for component in b]
    spec = WCOSpec(a.lift(target.degree_cap), b)
    domain = (Truncation(spec.n, cap),
              SpaceSpec(space.kind, spec.n, space.alpha))
    codomain = (target, SpaceSpec(space.kind, spec.m, space.alpha))
    return wco_matrix(spec, domain, codomain)


def operator(text, cap, space):
    """Resolve an operator JSON file or a built-in operator descriptor.

    Descriptors: ``identity``, ``shift:i=k`` (1-based), ``rudin``,
    ``average`` and ``wco:<a-file>:<b-file>``.
    """
    space = parse_space(space)
    trunc = Truncation(space.n, cap)
    if is_path(text):
        return OperatorMatrix.from_json(load_json(text))
    name, args, kwargs = parse_descriptor(text)
    if name == "wco":
        if len(args) != 2 or kwargs:
            raise ParseError("Expected wco:<a-file>:<b-file>, got {!r}".format(
                text))
        return wco_operator(args[0], args[1], cap, space)
    if args:
        raise ParseError("Unexpected fields {} in {!r}".format(args, text))
    if name == "identity":
        return identity_operator(trunc, space)
    if name == "shift":
        _check_keys(name, kwargs, ("i",), text)
        i = parse_int(kwargs.get("i", 1), "i")
        return shift_matrix(i - 1, trunc, space)
    if name == "rudin":
        return rudin_operator(cap, cap)
    if name == "average":
        return averaging_operator(trunc, space)
    raise ParseError("Unknown operator descriptor {!r}".format(text))
