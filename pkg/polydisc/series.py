"""Truncated multivariate power series.

Every function, multiplier and symbol handled by the workbench is a
:class:`TruncatedSeries`: a dense vector of complex coefficients indexed by
the multi-indices of total degree at most ``degree_cap``, enumerated in
graded lexicographic order (by total degree, ties broken by ascending
tuple order).
"""

# Imports
import math
import numbers
import logging
import functools
import collections

import numpy
from scipy import special

from polydisc.exception import (
    DimensionError, PreconditionError, DivisionError, ParseError)
from polydisc.utils import DEFAULT_TOLERANCES

# Logging
logger = logging.getLogger(__name__)

# Evaluation chunk (points x monomials)
EVAL_CHUNK = 2 ** 21


# Multi-indices

class MultiIndex(tuple):
    """Tuple of non-negative integers (a_1, ..., a_n)."""

    __slots__ = ()

    def __new__(cls, entries):
        entries = tuple(int(a) for a in entries)
        if not entries:
            raise DimensionError("A multi-index needs at least one entry")
        if any(a < 0 for a in entries):
            raise PreconditionError(
                "Negative multi-index entry in {}".format(entries))
        return super(MultiIndex, cls).__new__(cls, entries)

    @property
    def n(self):
        return len(self)

    @property
    def order(self):
        return sum(self)

    @property
    def factorial(self):
        return math.prod(math.factorial(a) for a in self)

    @property
    def sort_key(self):
        return (self.order, tuple(self))

    def plus(self, other):
        if len(other) != len(self):
            raise DimensionError("Cannot add {} and {}".format(self, other))
        return MultiIndex(a + b for a, b in zip(self, other))

    @classmethod
    def unit(cls, n, i):
        return cls(int(j == i) for j in range(n))


def monomial_label(alpha):
    factors = []
    for i, a in enumerate(alpha, 1):
        if a == 1:
            factors.append("z{}".format(i))
        elif a > 1:
            factors.append("z{}^{}".format(i, a))
    return "*".join(factors) or "1"


# Basis tables

def _compositions(n, degree):
    if n == 1:
        yield (degree,)
        return
    for first in range(degree + 1):
        for rest in _compositions(n - 1, degree - first):
            yield (first,) + rest


@functools.lru_cache(maxsize=None)
def _exponents(n, cap):
    rows = [row for degree in range(cap + 1)
            for row in _compositions(n, degree)]
    table = numpy.array(rows, dtype=numpy.int64).reshape(-1, n)
    table.setflags(write=False)
    return table


@functools.lru_cache(maxsize=None)
def _keys(n, cap):
    powers = (cap + 1) ** numpy.arange(n, dtype=numpy.int64)
    keys = _exponents(n, cap) @ powers
    order = numpy.argsort(keys, kind="stable")
    return powers, keys[order], order


def _locate(n, cap, exps):
    exps = numpy.asarray(exps, dtype=numpy.int64).reshape(-1, n)
    powers, sorted_keys, order = _keys(n, cap)
    valid = (exps.min(axis=1) >= 0) & (exps.sum(axis=1) <= cap)
    keys = numpy.clip(exps, 0, cap) @ powers
    pos = numpy.searchsorted(sorted_keys, keys).clip(0, len(sorted_keys) - 1)
    found = valid & (sorted_keys[pos] == keys)
    return numpy.where(found, order[pos], -1)


@functools.lru_cache(maxsize=32)
def _pair_table(n, cap):
    # Pairs (beta, gamma) with |beta| + |gamma| <= cap, ordered by beta
    exps = _exponents(n, cap)
    counts = [math.comb(d + n, n) for d in range(cap + 1)]
    left, right, target = [], [], []
    for i, beta in enumerate(exps):
        count = counts[cap - int(beta.sum())]
        left.append(numpy.full(count, i))
        right.append(numpy.arange(count))
        target.append(_locate(n, cap, exps[:count] + beta))
    table = tuple(numpy.concatenate(x) for x in (left, right, target))
    logger.debug("Product table n={} cap={}: {} pairs".format(
        n, cap, len(table[0])))
    return table


# Truncation

class Truncation(collections.namedtuple("Truncation", "n degree_cap")):
    """Variable count and maximal retained total degree."""

    __slots__ = ()

    def __new__(cls, n, degree_cap):
        n, degree_cap = int(n), int(degree_cap)
        if n < 1:
            raise DimensionError("Variable count must be positive")
        if degree_cap < 0:
            raise PreconditionError("Degree cap must be non-negative")
        return super(Truncation, cls).__new__(cls, n, degree_cap)

    @property
    def size(self):
        return math.comb(self.degree_cap + self.n, self.n)

    @property
    def exponents(self):
        """Read-only (size, n) integer array of the basis multi-indices."""
        return _exponents(self.n, self.degree_cap)

    @property
    def degrees(self):
        return self.exponents.sum(axis=1)

    @property
    def basis(self):
        return tuple(MultiIndex(row) for row in self.exponents)

    @property
    def pairs(self):
        return _pair_table(self.n, self.degree_cap)

    def index(self, alpha):
        if len(alpha) != self.n:
            raise DimensionError("Multi-index {} has not {} entries".format(
                tuple(alpha), self.n))
        position = int(_locate(self.n, self.degree_cap, [alpha])[0])
        if position < 0:
            raise PreconditionError("Multi-index {} exceeds cap {}".format(
                tuple(alpha), self.degree_cap))
        return position

    def locate(self, exps):
        """Basis positions of an array of multi-indices (-1 if dropped)."""
        return _locate(self.n, self.degree_cap, exps)

    def count(self, degree):
        """Number of basis elements of total degree at most ``degree``."""
        return math.comb(min(degree, self.degree_cap) + self.n, self.n)

    def with_cap(self, degree_cap):
        return Truncation(self.n, degree_cap)

    def check(self, other):
        if other != self:
            raise DimensionError("Truncation mismatch: {} vs {}".format(
                tuple(self), tuple(other)))


# Array level helpers

def power_table(values, top):
    """Array of shape values.shape + (top + 1,) holding values**k."""
    values = numpy.asarray(values, dtype=complex)
    steps = numpy.repeat(values[..., None], top + 1, axis=-1)
    steps[..., 0] = 1
    return numpy.cumprod(steps, axis=-1)


def _mul_arrays(trunc, x, y):
    left, right, target = trunc.pairs
    # Skip zero rows of the left factor
    keep = x[left] != 0
    prod = x[left[keep]] * y[right[keep]]
    target = target[keep]
    real = numpy.bincount(target, weights=prod.real, minlength=trunc.size)
    imag = numpy.bincount(target, weights=prod.imag, minlength=trunc.size)
    return real + 1j * imag


# Series

class TruncatedSeries(object):
    """Immutable truncated power series with dense coefficients."""

    __slots__ = ("trunc", "coeffs")

    # Let numpy scalars defer to the reflected operators
    __array_ufunc__ = None

    def __init__(self, trunc, coeffs=None):
        coeffs = (numpy.zeros(trunc.size, dtype=complex) if coeffs is None
                  else numpy.array(coeffs, dtype=complex))
        if coeffs.shape != (trunc.size,):
            raise DimensionError("Expected {} coefficients, got {}".format(
                trunc.size, coeffs.shape))
        coeffs.setflags(write=False)
        self.trunc = trunc
        self.coeffs = coeffs

    # Constructors

    @classmethod
    def zeros(cls, trunc):
        return cls(trunc)

    @classmethod
    def constant(cls, trunc, value):
        coeffs = numpy.zeros(trunc.size, dtype=complex)
        coeffs[0] = value
        return cls(trunc, coeffs)

    @classmethod
    def one(cls, trunc):
        return cls.constant(trunc, 1.0)

    @classmethod
    def monomial(cls, trunc, alpha, value=1.0):
        coeffs = numpy.zeros(trunc.size, dtype=complex)
        coeffs[trunc.index(alpha)] = value
        return cls(trunc, coeffs)

    @classmethod
    def variable(cls, trunc, i):
        """The coordinate function z_i (0-based)."""
        if not 0 <= i < trunc.n:
            raise DimensionError("No variable {} among {}".format(i, trunc.n))
        return cls.monomial(trunc, MultiIndex.unit(trunc.n, i))

    @classmethod
    def from_terms(cls, trunc, terms):
        coeffs = numpy.zeros(trunc.size, dtype=complex)
        for alpha, value in dict(terms).items():
            coeffs[trunc.index(alpha)] += value
        return cls(trunc, coeffs)

    # Properties

    @property
    def n(self):
        return self.trunc.n

    @property
    def degree_cap(self):
        return self.trunc.degree_cap

    @property
    def constant_term(self):
        return complex(self.coeffs[0])

    def degree(self, tol=0.0):
        """Largest degree with a coefficient above ``tol``, -1 if none."""
        support = numpy.abs(self.coeffs) > tol
        if not support.any():
            return -1
        return int(self.trunc.degrees[support].max())

    def is_zero(self, tol=0.0):
        return self.degree(tol) < 0

    def coefficient(self, alpha):
        position = self.trunc.locate([alpha])[0]
        return complex(self.coeffs[position]) if position >= 0 else 0j

    def terms(self):
        """Yield the (multi-index, coefficient) pairs of the support."""
        for position in numpy.flatnonzero(self.coeffs):
            yield (MultiIndex(self.trunc.exponents[position]),
                   complex(self.coeffs[position]))

    def homogeneous_part(self, k):
        coeffs = numpy.where(self.trunc.degrees == k, self.coeffs, 0)
        return TruncatedSeries(self.trunc, coeffs)

    def homogeneous_norms(self):
        """Euclidean coefficient norm of each homogeneous part."""
        squares = numpy.bincount(
            self.trunc.degrees, weights=numpy.abs(self.coeffs) ** 2,
            minlength=self.degree_cap + 1)
        return numpy.sqrt(squares)

    def lift(self, degree_cap):
        """Re-express the series with another degree cap."""
        target = self.trunc.with_cap(degree_cap)
        if target == self.trunc:
            return self
        positions = target.locate(self.trunc.exponents)
        kept = positions >= 0
        coeffs = numpy.zeros(target.size, dtype=complex)
        coeffs[positions[kept]] = self.coeffs[kept]
        return TruncatedSeries(target, coeffs)

    def dilate(self, radius):
        """The series of z -> f(radius * z)."""
        return TruncatedSeries(
            self.trunc, self.coeffs * radius ** self.trunc.degrees)

    def shift(self, alpha):
        """Exact product with z^alpha; coefficients pushed past the cap are
        dropped."""
        if len(alpha) != self.n:
            raise DimensionError("Multi-index {} has not {} entries".format(
                tuple(alpha), self.n))
        positions = self.trunc.locate(
            self.trunc.exponents + numpy.asarray(alpha, dtype=numpy.int64))
        kept = positions >= 0
        coeffs = numpy.zeros(self.trunc.size, dtype=complex)
        coeffs[positions[kept]] = self.coeffs[kept]
        return TruncatedSeries(self.trunc, coeffs)

    def allclose(self, other, tol=DEFAULT_TOLERANCES.coefficient):
        self.trunc.check(other.trunc)
        return bool(numpy.max(numpy.abs(self.coeffs - other.coeffs)) <= tol)

    def max_difference(self, other):
        self.trunc.check(other.trunc)
        return float(numpy.max(numpy.abs(self.coeffs - other.coeffs)))

    # Evaluation

    def evaluate(self, points):
        """Evaluate at an array of points of shape (..., n)."""
        points = numpy.asarray(points, dtype=complex)
        if points.shape[-1:] != (self.n,):
            raise DimensionError("Points must have {} coordinates".format(
                self.n))
        flat = points.reshape(-1, self.n)
        support = numpy.flatnonzero(self.coeffs)
        exps = self.trunc.exponents[support]
        coeffs = self.coeffs[support]
        result = numpy.zeros(len(flat), dtype=complex)
        if not len(support):
            return result.reshape(points.shape[:-1])
        top = int(exps.max())
        step = max(1, EVAL_CHUNK // max(len(support), top + 1))
        for start in range(0, len(flat), step):
            chunk = flat[start:start + step]
            powers = power_table(chunk, top)
            values = numpy.ones((len(chunk), len(support)), dtype=complex)
            for i in range(self.n):
                values *= powers[:, i, exps[:, i]]
            result[start:start + step] = values @ coeffs
        return result.reshape(points.shape[:-1])

    def __call__(self, point):
        return series_eval(self, point)

    # Arithmetic

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            self.trunc.check(other.trunc)
            return other.coeffs
        if isinstance(other, numbers.Number):
            return TruncatedSeries.constant(self.trunc, other).coeffs
        return None

    def __add__(self, other):
        coeffs = self._coerce(other)
        if coeffs is None:
            return NotImplemented
        return TruncatedSeries(self.trunc, self.coeffs + coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        coeffs = self._coerce(other)
        if coeffs is None:
            return NotImplemented
        return TruncatedSeries(self.trunc, self.coeffs - coeffs)

    def __rsub__(self, other):
        coeffs = self._coerce(other)
        if coeffs is None:
            return NotImplemented
        return TruncatedSeries(self.trunc, coeffs - self.coeffs)

    def __neg__(self):
        return TruncatedSeries(self.trunc, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        if isinstance(other, numbers.Number):
            return TruncatedSeries(self.trunc, self.coeffs * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_divide(self, other)
        if isinstance(other, numbers.Number):
            if other == 0:
                raise DivisionError("Division of a series by zero")
            return TruncatedSeries(self.trunc, self.coeffs / other)
        return NotImplemented

    # Representation

    def __str__(self):
        parts = []
        for alpha, value in self.terms():
            if value.imag == 0:
                text = "{:.12g}".format(value.real)
            else:
                text = "({:.12g})".format(value)
            label = monomial_label(alpha)
            parts.append(text if label == "1" else text + "*" + label)
        return " + ".join(parts) or "0"

    def __repr__(self):
        return "TruncatedSeries(n={}, cap={}, {})".format(
            self.n, self.degree_cap, self)

    # JSON

    def to_json(self):
        return {
            "n": self.n,
            "degree_cap": self.degree_cap,
            "terms": [{"alpha": list(alpha), "re": value.real,
                       "im": value.imag} for alpha, value in self.terms()]}

    @classmethod
    def from_json(cls, data):
        try:
            trunc = Truncation(data["n"], data["degree_cap"])
            terms = data["terms"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError("Malformed series JSON: {!r}".format(exc))
        coeffs = numpy.zeros(trunc.size, dtype=complex)
        for term in terms:
            try:
                alpha = MultiIndex(term["alpha"])
                value = complex(float(term["re"]), float(term.get("im", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError("Malformed series term {!r}: {!r}".format(
                    term, exc))
            if alpha.n != trunc.n:
                raise ParseError("Term {} has not {} entries".format(
                    list(alpha), trunc.n))
            if alpha.order > trunc.degree_cap:
                raise ParseError("Term {} exceeds degree cap {}".format(
                    list(alpha), trunc.degree_cap))
            coeffs[trunc.index(alpha)] += value
        return cls(trunc, coeffs)


# Operations

def series_mul(f, g):
    """Truncated Cauchy product, summed over beta in graded-lex order."""
    f.trunc.check(g.trunc)
    return TruncatedSeries(f.trunc, _mul_arrays(f.trunc, f.coeffs, g.coeffs))


def series_exp(f, tol=DEFAULT_TOLERANCES.coefficient):
    """Truncation of exp(f) for f without constant term (Horner scheme)."""
    if abs(f.constant_term) > tol:
        raise PreconditionError(
            "series_exp needs a zero constant term, got {}".format(
                f.constant_term), constant=f.constant_term)
    f = f - f.constant_term
    result = TruncatedSeries.one(f.trunc)
    for k in range(f.degree_cap, 0, -1):
        result = 1 + series_mul(f, result) / k
    return result


def reciprocal(f, floor=DEFAULT_TOLERANCES.coefficient):
    """Formal inverse of a series with non-zero constant term."""
    f0 = f.constant_term
    if abs(f0) <= floor:
        raise DivisionError(
            "Constant term {} vanishes; division undefined at "
            "truncation scale".format(f0), constant=f0)
    h = (f - f0) / f0
    result = TruncatedSeries.one(f.trunc)
    for _ in range(f.degree_cap):
        result = 1 - series_mul(h, result)
    return result / f0


def series_divide(g, f, floor=DEFAULT_TOLERANCES.coefficient):
    return series_mul(g, reciprocal(f, floor))


def monomial_images(b, trunc):
    """Coefficient matrix whose column alpha is b^alpha.

    Args:
        b: tuple of ``trunc.n`` series sharing one truncation.
        trunc: truncation enumerating the exponents alpha.
    """
    b = tuple(b)
    if len(b) != trunc.n:
        raise DimensionError("Symbol has {} components, expected {}".format(
            len(b), trunc.n))
    target = b[0].trunc
    for component in b[1:]:
        target.check(component.trunc)
    columns = numpy.zeros((target.size, trunc.size), dtype=complex)
    columns[0, 0] = 1
    exps = trunc.exponents
    for j in range(1, trunc.size):
        i = int(numpy.flatnonzero(exps[j])[0])
        parent = exps[j].copy()
        parent[i] -= 1
        columns[:, j] = _mul_arrays(
            target, b[i].coeffs, columns[:, trunc.index(parent)])
    return columns


def series_compose(f, b):
    """Truncation of f(b_1, ..., b_n), in the truncation of b.

    Powers b^alpha are built degree by degree from their graded-lex
    parents, one product per monomial of f.
    """
    b = tuple(b)
    if len(b) != f.n:
        raise DimensionError("Cannot compose {} variables with {}".format(
            f.n, len(b)))
    degree = max(f.degree(), 0)
    images = monomial_images(b, f.trunc.with_cap(degree))
    coeffs = f.coeffs[:f.trunc.count(degree)]
    return TruncatedSeries(b[0].trunc, images @ coeffs)


def series_eval(f, z):
    z = numpy.asarray(z, dtype=complex).reshape(-1)
    if z.shape != (f.n,):
        raise DimensionError("Point {} has not {} coordinates".format(
            z.tolist(), f.n))
    return complex(f.evaluate(z[None, :])[0])


def exp_linear(trunc, w):
    """Exact truncation of exp(w . z): coefficients w^alpha / alpha!."""
    w = numpy.asarray(w, dtype=complex).reshape(-1)
    if w.shape != (trunc.n,):
        raise DimensionError("Exponent {} has not {} entries".format(
            w.tolist(), trunc.n))
    exps = trunc.exponents
    powers = power_table(w, trunc.degree_cap)
    terms = powers[numpy.arange(trunc.n), exps] / special.factorial(exps)
    coeffs = numpy.prod(terms, axis=1)
    return TruncatedSeries(trunc, coeffs)


def exponential_tail(s, degree):
    """Sum of s^k / k! over k > degree, for s >= 0."""
    if s <= 0:
        return 0.0
    return float(numpy.exp(s) * special.gammainc(degree + 1, s))


# Closed-form evaluators

class Evaluator(collections.namedtuple(
        "Evaluator", "name n func log_func", defaults=(None,))):
    """Named closed-form function of n variables.

    ``func`` maps an array of points of shape (P, n) to P complex values.
    Evaluators share the ``evaluate`` interface of :class:`TruncatedSeries`
    so that quadrature runs on non-polynomial functions without truncation.
    The optional ``log_func`` gives log|f| directly, for functions such as
    exponentials whose modulus underflows long before their logarithm.
    """

    __slots__ = ()

    def _apply(self, func, points, dtype):
        points = numpy.asarray(points, dtype=complex)
        if points.shape[-1:] != (self.n,):
            raise DimensionError("Points must have {} coordinates".format(
                self.n))
        flat = points.reshape(-1, self.n)
        with numpy.errstate(divide="ignore", over="ignore",
                            invalid="ignore"):
            values = numpy.asarray(func(flat), dtype=dtype)
        return values.reshape(points.shape[:-1])

    def evaluate(self, points):
        return self._apply(self.func, points, complex)

    def log_modulus(self, points):
        if self.log_func is None:
            modulus = numpy.abs(self.evaluate(points))
            with numpy.errstate(divide="ignore"):
                return numpy.log(modulus)
        return self._apply(self.log_func, points, float)

    def __call__(self, point):
        point = numpy.asarray(point, dtype=complex).reshape(1, self.n)
        return complex(self.evaluate(point)[0])

    def to_json(self):
        return {"name": self.name, "n": self.n}

    def __str__(self):
        return self.name
