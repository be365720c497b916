"""Provide parsing and serialization helpers."""

# Imports
import collections
import json
import numbers

import numpy

from polydisc.exception import ParseError


# Descriptor strings


def parse_descriptor(text):
    """Split a ``name:key=value:key=value`` descriptor.

    Fields without an equal sign are returned as positional arguments,
    which allows descriptors such as ``wco:a.json:b.json``.
    """
    if not isinstance(text, str) or not text.strip():
        raise ParseError("Empty descriptor {!r}".format(text))
    name, *fields = text.strip().split(":")
    args, kwargs = [], {}
    for field in fields:
        if "=" not in field:
            args.append(field)
            continue
        key, value = field.split("=", 1)
        key = key.strip().lower()
        if key in kwargs:
            raise ParseError("Duplicate key {!r} in {!r}".format(key, text))
        kwargs[key] = value.strip()
    return name.strip().lower(), args, kwargs


def parse_int(value, name="value"):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParseError("{} is not an integer: {!r}".format(name, value))


def parse_float(value, name="value"):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParseError("{} is not a real number: {!r}".format(name, value))


def parse_complex(value, name="value"):
    if isinstance(value, numbers.Number):
        return complex(value)
    try:
        return complex(value.replace(" ", "").replace("i", "j"))
    except (AttributeError, ValueError):
        raise ParseError("{} is not a complex number: {!r}".format(
            name, value))


def parse_complex_list(value, name="value"):
    return tuple(parse_complex(x, name) for x in value.split(",") if x)


def parse_float_list(value, name="value"):
    return tuple(parse_float(x, name) for x in value.split(",") if x)


# Radius schedules


def default_radii(count=10):
    """Return the schedule r_k = 1 - 2^-k for k = 1..count."""
    return tuple(1.0 - 2.0 ** (-k) for k in range(1, count + 1))


def next_power_of_two(value):
    result = 1
    while result < value:
        result *= 2
    return result


def is_power_of_two(value):
    return value >= 1 and value & (value - 1) == 0


# Complex encoding


def complex_to_json(value):
    value = complex(value)
    return {"re": value.real, "im": value.imag}


def complex_from_json(data, name="value"):
    try:
        return complex(float(data["re"]), float(data.get("im", 0.0)))
    except (KeyError, TypeError, ValueError):
        raise ParseError("Malformed complex {} {!r}".format(name, data))


# JSON conversion


def json_ready(obj):
    """Convert results (namedtuples, numpy values, complex) to JSON data."""
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, tuple) and hasattr(obj, "_asdict"):
        data = {key: json_ready(value) for key, value in obj._asdict().items()}
        if hasattr(obj, "verdict"):
            data["verdict"] = obj.verdict
        return data
    if isinstance(obj, dict):
        return {str(key): json_ready(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(value) for value in obj]
    if isinstance(obj, numpy.ndarray):
        return json_ready(obj.tolist())
    if isinstance(obj, (bool, numpy.bool_)):
        return bool(obj)
    if isinstance(obj, numbers.Integral):
        return int(obj)
    if isinstance(obj, numbers.Real):
        return float(obj)
    if isinstance(obj, numbers.Complex):
        return complex_to_json(obj)
    return obj


def dump_json(data):
    """Deterministic JSON text."""
    return json.dumps(json_ready(data), sort_keys=True, indent=2) + "\n"


def load_json(path):
    try:
        with open(path) as stream:
            return json.load(stream)
    except OSError as exc:
        raise ParseError("Cannot read {}: {}".format(path, exc))
    except ValueError as exc:
        raise ParseError("Invalid JSON in {}: {}".format(path, exc))


# Tolerance table

Tolerances = collections.namedtuple(
    "Tolerances",
    "coefficient quadrature outer plateau zero_distance "
    "gram_residual nonvanishing_floor fit tail log_floor",
)

DEFAULT_TOLERANCES = Tolerances(
    coefficient=1e-12,
    quadrature=1e-6,
    outer=1e-3,
    plateau=1e-2,
    zero_distance=1e-6,
    gram_residual=1e-10,
    nonvanishing_floor=1e-12,
    fit=1e-6,
    tail=1e-8,
    log_floor=1e-14,
)


def tolerances(**overrides):
    """Return the default tolerance table with some entries replaced."""
    unknown = set(overrides) - set(Tolerances._fields)
    if unknown:
        raise ParseError("Unknown tolerance(s): {}".format(
            ", ".join(sorted(unknown))))
    values = {key: float(value) for key, value in overrides.items()
              if value is not None}
    for key, value in values.items():
        if not value > 0:
            raise ParseError("Tolerance {} must be positive: {}".format(
                key, value))
    return DEFAULT_TOLERANCES._replace(**values)
