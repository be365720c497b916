"""Norms, Gram matrices and torus quadrature for the polydisc spaces.

Three coefficient-weighted Hilbert spaces are provided, all with ``||1|| = 1``:

- ``h2``: the Hardy space, weight 1;
- ``dirichlet``: weight ``((a_1+1)...(a_n+1))^alpha`` (``alpha = 0`` is
  the Hardy space, negative ``alpha`` gives Bergman-type spaces);
- ``drury``: the Drury-Arveson space, weight ``a! / |a|!``.

For ``p != 2`` the Hardy spaces only exist here through quadrature
p-means at finite radii.
"""

# Imports
import math
import logging
import functools
import collections

import numpy

from polydisc.series import Truncation, power_table
from polydisc.exception import DimensionError, ParseError, PreconditionError
from polydisc.utils import (
    DEFAULT_TOLERANCES, parse_descriptor, parse_int, parse_float,
    is_power_of_two, next_power_of_two, default_radii)

# Logging
logger = logging.getLogger(__name__)

# Space kinds
HARDY, DIRICHLET, DRURY = "h2", "dirichlet", "drury"
KIND_ALIASES = {
    "h2": HARDY, "hardy": HARDY,
    "dirichlet": DIRICHLET,
    "drury": DRURY, "da": DRURY, "drury-arveson": DRURY}

# Quadrature defaults
MAX_FIBRE_NODES = 2 ** 20
QUADRATURE_CHUNK = 2 ** 20


# Weights

@functools.lru_cache(maxsize=64)
def _weights(kind, alpha, n, cap):
    exps = Truncation(n, cap).exponents
    if kind == HARDY:
        weights = numpy.ones(len(exps))
    elif kind == DIRICHLET:
        weights = numpy.prod(exps + 1.0, axis=1) ** alpha
    else:
        weights = numpy.array([
            math.prod(math.factorial(int(a)) for a in row) /
            math.factorial(int(row.sum())) for row in exps])
    weights.setflags(write=False)
    return weights


class SpaceSpec(collections.namedtuple("SpaceSpec", "kind n alpha")):
    """A coefficient weight rule on n variables."""

    __slots__ = ()

    def __new__(cls, kind, n, alpha=0.0):
        try:
            kind = KIND_ALIASES[kind.lower()]
        except (AttributeError, KeyError):
            raise ParseError("Unknown space kind {!r}".format(kind))
        n = int(n)
        if n < 1:
            raise DimensionError("Variable count must be positive")
        alpha = float(alpha) if kind == DIRICHLET else 0.0
        return super(SpaceSpec, cls).__new__(cls, kind, n, alpha)

    @classmethod
    def hardy(cls, n):
        return cls(HARDY, n)

    @classmethod
    def dirichlet(cls, n, alpha):
        return cls(DIRICHLET, n, alpha)

    @classmethod
    def drury(cls, n):
        return cls(DRURY, n)

    @classmethod
    def parse(cls, text):
        """Parse strings such as ``h2:n=2`` or ``dirichlet:n=2:alpha=1.0``."""
        name, args, kwargs = parse_descriptor(text)
        if args:
            raise ParseError("Unexpected fields {} in {!r}".format(args, text))
        unknown = set(kwargs) - {"n", "alpha"}
        if unknown:
            raise ParseError("Unknown keys {} in {!r}".format(
                sorted(unknown), text))
        n = parse_int(kwargs.get("n", 1), "n")
        alpha = parse_float(kwargs.get("alpha", 0.0), "alpha")
        if name == DIRICHLET and "alpha" not in kwargs:
            raise ParseError("Dirichlet space needs alpha: {!r}".format(text))
        return cls(name, n, alpha)

    @property
    def descriptor(self):
        if self.kind == DIRICHLET:
            return "{}:n={}:alpha={!r}".format(self.kind, self.n, self.alpha)
        return "{}:n={}".format(self.kind, self.n)

    @property
    def hardy_type(self):
        return self.kind == HARDY or (
            self.kind == DIRICHLET and self.alpha == 0)

    def weights(self, trunc):
        self.check(trunc)
        return _weights(self.kind, self.alpha, trunc.n, trunc.degree_cap)

    def weight(self, alpha):
        trunc = Truncation(self.n, sum(alpha))
        return float(self.weights(trunc)[trunc.index(alpha)])

    def check(self, trunc):
        if trunc.n != self.n:
            raise DimensionError(
                "Space {} has {} variables, series has {}".format(
                    self.descriptor, self.n, trunc.n))

    def __str__(self):
        return self.descriptor


def parse_space(text):
    if isinstance(text, SpaceSpec):
        return text
    return SpaceSpec.parse(text)


# Norms

def inner(spec, f, g):
    """Weighted inner product <f, g>, linear in f."""
    f.trunc.check(g.trunc)
    weights = spec.weights(f.trunc)
    return complex(numpy.sum(weights * f.coeffs * g.coeffs.conj()))


def norm(spec, f):
    weights = spec.weights(f.trunc)
    return float(numpy.sqrt(numpy.sum(weights * numpy.abs(f.coeffs) ** 2)))


def shift_norms(spec, trunc):
    """Norms of the shifts S_i acting on the monomials of the truncation."""
    spec.check(trunc)
    extended = trunc.with_cap(trunc.degree_cap + 1)
    weights = spec.weights(extended)
    exps = trunc.exponents
    base = weights[:trunc.size]
    result = []
    for i in range(trunc.n):
        shifted = exps.copy()
        shifted[:, i] += 1
        ratios = weights[extended.locate(shifted)] / base
        result.append(float(numpy.sqrt(ratios.max())))
    return tuple(result)


def evaluation_norm(spec, b, trunc):
    """Norm of f -> f(b) on the polynomials of the truncation."""
    spec.check(trunc)
    b = numpy.asarray(b, dtype=complex).reshape(-1)
    if b.shape != (trunc.n,):
        raise DimensionError("Point {} has not {} coordinates".format(
            b.tolist(), trunc.n))
    powers = power_table(b, trunc.degree_cap)
    values = numpy.prod(powers[numpy.arange(trunc.n), trunc.exponents], axis=1)
    weights = spec.weights(trunc)
    return float(numpy.sqrt(numpy.sum(numpy.abs(values) ** 2 / weights)))


# Gram matrices

class GramMatrix(collections.namedtuple("GramMatrix", "basis entries")):
    """Hermitian matrix of the pairwise inner products of a basis."""

    __slots__ = ()

    @property
    def size(self):
        return len(self.basis)

    def hermitian_defect(self):
        return float(numpy.max(numpy.abs(
            self.entries - self.entries.conj().T), initial=0.0))

    def min_eigenvalue(self):
        symmetric = (self.entries + self.entries.conj().T) / 2
        return float(numpy.linalg.eigvalsh(symmetric).min())

    def condition(self):
        return float(numpy.linalg.cond(self.entries))

    def to_csv(self, labels=None):
        """Row-major CSV with a header of basis labels."""
        labels = labels or [str(f) for f in self.basis]
        lines = [",".join(["basis"] + ['"{}"'.format(x) for x in labels])]
        for label, row in zip(labels, self.entries):
            cells = ["{!r}".format(complex(x)) for x in row]
            lines.append(",".join(['"{}"'.format(label)] + cells))
        return "\n".join(lines) + "\n"


def gram_entries(spec, columns, trunc):
    """G = B^T W conj(B) for a coefficient matrix B with one column per
    basis element."""
    weights = spec.weights(trunc)
    columns = numpy.asarray(columns, dtype=complex)
    return (columns.T * weights) @ columns.conj()


def gram(spec, basis):
    basis = list(basis)
    if not basis:
        raise PreconditionError("Empty Gram basis")
    trunc = basis[0].trunc
    for element in basis[1:]:
        trunc.check(element.trunc)
    columns = numpy.stack([element.coeffs for element in basis], axis=1)
    return GramMatrix(tuple(basis), gram_entries(spec, columns, trunc))


# Quadrature rules

class QuadratureRule(collections.namedtuple(
        "QuadratureRule", "n points_per_circle radius shifted")):
    """Tensor trapezoid rule on the torus of the given radius.

    Nodes are ``radius * exp(2 pi i (j + s) / K)`` per variable, with
    ``s = 1/2`` for shifted rules and ``s = 0`` otherwise. The radius may be
    1 to integrate boundary values of closed-form functions.
    """

    __slots__ = ()

    def __new__(cls, n, points_per_circle, radius, shifted=False):
        n, points_per_circle = int(n), int(points_per_circle)
        if n < 1:
            raise DimensionError("Variable count must be positive")
        if not is_power_of_two(points_per_circle):
            raise PreconditionError(
                "Points per circle must be a power of two, got {}".format(
                    points_per_circle))
        radius = float(radius)
        if not 0 < radius <= 1:
            raise PreconditionError(
                "Quadrature radius must lie in (0, 1], got {}".format(radius))
        return super(QuadratureRule, cls).__new__(
            cls, n, points_per_circle, radius, bool(shifted))

    @classmethod
    def for_cap(cls, n, degree_cap, radius, shifted=False):
        """Smallest power-of-two rule exact on retained trig polynomials."""
        return cls(n, next_power_of_two(2 * degree_cap + 1), radius, shifted)

    @property
    def circle(self):
        k = self.points_per_circle
        offset = 0.5 if self.shifted else 0.0
        angles = 2 * numpy.pi * (numpy.arange(k) + offset) / k
        return self.radius * numpy.exp(1j * angles)

    @property
    def size(self):
        return self.points_per_circle ** self.n

    @property
    def nodes(self):
        grids = numpy.meshgrid(*([self.circle] * self.n), indexing="ij")
        return numpy.stack([grid.reshape(-1) for grid in grids], axis=1)

    def with_radius(self, radius):
        return self._replace(radius=float(radius))

    def check(self, f):
        if f.n != self.n:
            raise DimensionError(
                "Rule has {} variables, function has {}".format(self.n, f.n))


def _modulus(rule, f):
    rule.check(f)
    return numpy.abs(f.evaluate(rule.nodes))


def p_mean(rule, f, p):
    """Quadrature value of (mean over the torus of |f|^p)^(1/p)."""
    if not p > 0:
        raise PreconditionError("p must be positive, got {}".format(p))
    modulus = _modulus(rule, f)
    return float(numpy.mean(modulus ** p) ** (1.0 / p))


def sup_norm(rule, f):
    """Maximum modulus over the nodes: a lower bound of the sup norm."""
    return float(_modulus(rule, f).max())


def p_distance(rule, f, g, p):
    """Metric d_p(f, g): the mean of |f - g|^p for p < 1, the p-mean of
    f - g otherwise."""
    if not p > 0:
        raise PreconditionError("p must be positive, got {}".format(p))
    rule.check(f)
    rule.check(g)
    nodes = rule.nodes
    difference = numpy.abs(f.evaluate(nodes) - g.evaluate(nodes))
    value = float(numpy.mean(difference ** p))
    return value if p < 1 else value ** (1.0 / p)


PMeanProfile = collections.namedtuple(
    "PMeanProfile", "p radii values sup monotone")


def p_mean_profile(f, p, radii=None, points_per_circle=None,
                   tol=DEFAULT_TOLERANCES.quadrature):
    """p-means over a radius schedule.

    The sup over r is reported as the value at the largest radius, together
    with a flag telling whether the values were nondecreasing within tol.
    """
    radii = tuple(sorted(radii or default_radii()))
    if points_per_circle is None:
        cap = getattr(f, "degree_cap", 16)
        points_per_circle = next_power_of_two(2 * cap + 1)
    values = tuple(
        p_mean(QuadratureRule(f.n, points_per_circle, r), f, p)
        for r in radii)
    monotone = all(b >= a - tol for a, b in zip(values, values[1:]))
    if not monotone:
        logger.warning("Non-monotone {}-means over radii {}".format(p, radii))
    return PMeanProfile(p, radii, values, values[-1], monotone)


# Torus means with fibre refinement

TorusMean = collections.namedtuple(
    "TorusMean", "value fibres unconverged max_nodes")


def _circle(count, radius, shifted):
    offset = 0.5 if shifted else 0.0
    angles = 2 * numpy.pi * (numpy.arange(count) + offset) / count
    return radius * numpy.exp(1j * angles)


def _fibre_means(func, outer, circle):
    # Mean over the innermost variable for each outer node
    count, n = len(outer), outer.shape[1] + 1
    result = numpy.empty(count)
    step = max(1, QUADRATURE_CHUNK // len(circle))
    for start in range(0, count, step):
        block = outer[start:start + step]
        points = numpy.empty((len(block), len(circle), n), dtype=complex)
        points[:, :, :-1] = block[:, None, :]
        points[:, :, -1] = circle[None, :]
        values = numpy.asarray(func(points.reshape(-1, n)), dtype=float)
        result[start:start + step] = values.reshape(len(block), -1).mean(
            axis=1)
    return result


def torus_mean(func, n, radius=1.0, points_per_circle=256, shifted=True,
               refine=True, tol=DEFAULT_TOLERANCES.coefficient,
               max_nodes=MAX_FIBRE_NODES):
    """Mean of a real function over the torus of the given radius.

    Iterated trapezoid rule: the outer variables use ``points_per_circle``
    nodes, the innermost variable is refined fibre by fibre, doubling the
    node count until two successive fibre means agree within ``tol``
    (relative to the fibre mean magnitude). Shifted nodes never sample
    angle 0.

    Args:
        func: maps an array of points of shape (P, n) to P real values.
    """
    circle = _circle(points_per_circle, radius, shifted)
    if n > 1:
        grids = numpy.meshgrid(*([circle] * (n - 1)), indexing="ij")
        outer = numpy.stack([grid.reshape(-1) for grid in grids], axis=1)
    else:
        outer = numpy.zeros((1, 0), dtype=complex)
    means = _fibre_means(func, outer, circle)
    count = points_per_circle
    active = numpy.arange(len(outer)) if refine else numpy.arange(0)
    while len(active) and 2 * count <= max_nodes:
        count *= 2
        refined = _fibre_means(
            func, outer[active], _circle(count, radius, shifted))
        done = numpy.abs(refined - means[active]) <= tol * (
            1 + numpy.abs(refined))
        means[active] = refined
        active = active[~done]
    if len(active):
        logger.warning("{} of {} fibres unconverged at {} nodes".format(
            len(active), len(outer), count))
    logger.debug("Torus mean at r={}: {} fibres, up to {} nodes".format(
        radius, len(outer), count))
    return TorusMean(float(means.mean()), len(outer), len(active), count)
