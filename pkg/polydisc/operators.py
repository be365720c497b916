"""Operators between truncated monomial bases.

An :class:`OperatorMatrix` stores, column by column, the images of the
domain monomials in graded-lex order. Weighted composition operators
``f -> a * (f o b)`` are recovered from their first columns as
``a = T(1)`` and ``b_i = T(z_i) / T(1)``.
"""

# Imports
import logging
import collections

import numpy

from polydisc.series import (
    Truncation, TruncatedSeries, MultiIndex, series_mul, series_divide,
    series_compose, monomial_images, exp_linear, exponential_tail)
from polydisc.spaces import (
    SpaceSpec, shift_norms, parse_space, p_mean, QuadratureRule)
from polydisc.cyclicity import cyclicity_curve, CYCLIC, NON_CYCLIC
from polydisc.exception import (
    DimensionError, PreconditionError, DivisionError, InsufficientCapError,
    OverflowColumnsError, ParseError)
from polydisc.utils import (
    DEFAULT_TOLERANCES, default_radii, next_power_of_two)

# Logging
logger = logging.getLogger(__name__)

# Probe defaults
PROBE_RADII = (0.25, 0.5, 0.75)
PROBE_NODES = 16
NORM_LADDER = (4, 8, 12)
BOUND_TOL = 1e-3


# Operator matrix

class OperatorMatrix(object):
    """Linear map between two truncated spaces.

    Args:
        domain, codomain: (Truncation, SpaceSpec) pairs.
        entries: (codomain size, domain size) complex matrix; column j is
            the image of the j-th domain monomial.
        truncated: per-column flags for images that lost terms above the
            codomain cap.
    """

    def __init__(self, domain, codomain, entries, truncated=None):
        self.domain, self.domain_space = domain
        self.codomain, self.codomain_space = codomain
        self.domain_space.check(self.domain)
        self.codomain_space.check(self.codomain)
        entries = numpy.array(entries, dtype=complex)
        shape = (self.codomain.size, self.domain.size)
        if entries.shape != shape:
            raise DimensionError("Operator entries have shape {}, "
                                 "expected {}".format(entries.shape, shape))
        entries.setflags(write=False)
        self.entries = entries
        if truncated is None:
            truncated = numpy.zeros(self.domain.size, dtype=bool)
        self.truncated = numpy.array(truncated, dtype=bool)

    def column(self, alpha):
        return TruncatedSeries(
            self.codomain, self.entries[:, self.domain.index(alpha)])

    def apply(self, f):
        if f.n != self.domain.n:
            raise DimensionError("Operator on {} variables applied to "
                                 "{}".format(self.domain.n, f.n))
        coeffs = f.lift(self.domain.degree_cap).coeffs
        return TruncatedSeries(self.codomain, self.entries @ coeffs)

    def compose(self, other):
        """The operator self o other."""
        if (other.codomain, other.codomain_space) != (
                self.domain, self.domain_space):
            raise DimensionError("Cannot compose operators: codomain {} vs "
                                 "domain {}".format(
                                     tuple(other.codomain),
                                     tuple(self.domain)))
        truncated = other.truncated | (
            (numpy.abs(other.entries[self.truncated]) > 0).any(axis=0))
        return OperatorMatrix(
            (other.domain, other.domain_space),
            (self.codomain, self.codomain_space),
            self.entries @ other.entries, truncated)

    def __add__(self, other):
        if (self.domain, self.codomain) != (other.domain, other.codomain):
            raise DimensionError("Cannot add operators of different shapes")
        return OperatorMatrix(
            (self.domain, self.domain_space),
            (self.codomain, self.codomain_space),
            self.entries + other.entries, self.truncated | other.truncated)

    def __mul__(self, scalar):
        return OperatorMatrix(
            (self.domain, self.domain_space),
            (self.codomain, self.codomain_space),
            self.entries * scalar, self.truncated)

    __rmul__ = __mul__

    # JSON

    def to_json(self):
        def side(trunc, space):
            return {"n": trunc.n, "degree_cap": trunc.degree_cap,
                    "space": space.descriptor}
        flat = self.entries.reshape(-1, order="F")
        return {
            "domain": side(self.domain, self.domain_space),
            "codomain": side(self.codomain, self.codomain_space),
            "entries": [[x.real, x.imag] for x in flat],
            "truncated": [bool(x) for x in self.truncated]}

    @classmethod
    def from_json(cls, data):
        try:
            sides = [(Truncation(data[key]["n"], data[key]["degree_cap"]),
                      parse_space(data[key]["space"]))
                     for key in ("domain", "codomain")]
            flat = numpy.array(
                [complex(re, im) for re, im in data["entries"]])
            truncated = data.get("truncated")
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError("Malformed operator JSON: {!r}".format(exc))
        shape = (sides[1][0].size, sides[0][0].size)
        if flat.size != shape[0] * shape[1]:
            raise ParseError("Operator has {} entries, expected {}".format(
                flat.size, shape[0] * shape[1]))
        return cls(sides[0], sides[1], flat.reshape(shape, order="F"),
                   truncated)

    def __repr__(self):
        return "OperatorMatrix({} -> {})".format(
            self.domain_space.descriptor, self.codomain_space.descriptor)


def _check_overflow(truncated, allow_overflow, name):
    if truncated.any() and not allow_overflow:
        raise OverflowColumnsError(
            "{} pushes {} column(s) past the cap".format(
                name, int(truncated.sum())), columns=int(truncated.sum()))


def shift_matrix(i, trunc, spec, allow_overflow=True):
    """Matrix of f -> z_i f (0-based variable)."""
    if not 0 <= i < trunc.n:
        raise DimensionError("No variable {} among {}".format(i, trunc.n))
    exps = trunc.exponents.copy()
    exps[:, i] += 1
    positions = trunc.locate(exps)
    kept = positions >= 0
    entries = numpy.zeros((trunc.size, trunc.size), dtype=complex)
    entries[positions[kept], numpy.flatnonzero(kept)] = 1
    _check_overflow(~kept, allow_overflow, "Shift")
    return OperatorMatrix((trunc, spec), (trunc, spec), entries, ~kept)


def multiplier_matrix(phi, trunc, spec, allow_overflow=True):
    """Matrix of f -> phi f; images are exact up to the cap."""
    if phi.n != trunc.n:
        raise DimensionError("Multiplier on {} variables, basis on "
                             "{}".format(phi.n, trunc.n))
    support = numpy.flatnonzero(phi.coeffs)
    entries = numpy.zeros((trunc.size, trunc.size), dtype=complex)
    truncated = numpy.zeros(trunc.size, dtype=bool)
    for j, alpha in enumerate(trunc.exponents):
        targets = phi.trunc.exponents[support] + alpha
        positions = trunc.locate(targets)
        kept = positions >= 0
        entries[positions[kept], j] = phi.coeffs[support[kept]]
        truncated[j] = not kept.all()
    _check_overflow(truncated, allow_overflow, "Multiplier")
    return OperatorMatrix((trunc, spec), (trunc, spec), entries, truncated)


# Weighted composition operators

WCOCheck = collections.namedtuple(
    "WCOCheck", "sup_symbol into_polydisc min_weight nonvanishing")


class WCOSpec(collections.namedtuple("WCOSpec", "a b")):
    """Weight a and symbol b = (b_1, ..., b_n) over m variables."""

    __slots__ = ()

    def __new__(cls, a, b):
        b = tuple(b)
        if not b:
            raise DimensionError("Empty symbol")
        for component in b:
            a.trunc.check(component.trunc)
        if a.is_zero():
            raise PreconditionError("The weight vanishes identically")
        return super(WCOSpec, cls).__new__(cls, a, b)

    @property
    def n(self):
        return len(self.b)

    @property
    def m(self):
        return self.a.n

    def check(self, radii=PROBE_RADII, points=PROBE_NODES,
              floor=DEFAULT_TOLERANCES.nonvanishing_floor):
        """Sup of |b_i| and min of |a| over the probe nodes."""
        nodes = probe_nodes(self.m, radii, points)
        sup = max(float(numpy.abs(c.evaluate(nodes)).max()) for c in self.b)
        minimum = float(numpy.abs(self.a.evaluate(nodes)).min())
        scale = float(numpy.abs(self.a.coeffs).sum())
        return WCOCheck(sup, sup < 1, minimum, minimum > floor * scale)

    def to_json(self):
        return {"a": self.a.to_json(), "b": [c.to_json() for c in self.b]}

    @classmethod
    def from_json(cls, data):
        try:
            return cls(TruncatedSeries.from_json(data["a"]),
                       [TruncatedSeries.from_json(c) for c in data["b"]])
        except (KeyError, TypeError) as exc:
            raise ParseError("Malformed WCO JSON: {!r}".format(exc))


def wco_matrix(spec, domain, codomain):
    """Matrix of f -> a * (f o b): column alpha is a * b^alpha.

    Args:
        spec (WCOSpec): weight and symbol, in the codomain truncation.
        domain, codomain: (Truncation, SpaceSpec) pairs.
    """
    trunc, space = domain
    target, target_space = codomain
    if spec.n != trunc.n:
        raise DimensionError("Symbol has {} components, domain {} "
                             "variables".format(spec.n, trunc.n))
    a = spec.a.lift(target.degree_cap)
    b = [c.lift(target.degree_cap) for c in spec.b]
    images = monomial_images(b, trunc)
    entries = numpy.stack([
        series_mul(a, TruncatedSeries(target, column)).coeffs
        for column in images.T], axis=1)
    top = max(max(c.degree(), 0) for c in spec.b)
    truncated = max(spec.a.degree(), 0) + trunc.degrees * top > \
        target.degree_cap
    return OperatorMatrix(domain, codomain, entries, truncated)


def recover_wco(operator, floor=DEFAULT_TOLERANCES.nonvanishing_floor):
    """Weight a = T(1) and symbol b_i = T(z_i) / T(1)."""
    n = operator.domain.n
    if operator.domain.degree_cap < 1:
        raise PreconditionError("Recovery needs the degree one columns")
    a = operator.column((0,) * n)
    if a.is_zero():
        raise PreconditionError("T(1) vanishes identically")
    if abs(a.constant_term) <= floor:
        raise DivisionError(
            "Weight vanishes at origin; division undefined at truncation "
            "scale", constant=a.constant_term)
    b = [series_divide(operator.column(MultiIndex.unit(n, i)), a, floor)
         for i in range(n)]
    return WCOSpec(a, b)


WCODefect = collections.namedtuple("WCODefect", "value alpha defects")


def verify_wco(operator, spec):
    """Largest codomain norm of T(z^alpha) - a * b^alpha."""
    expected = wco_matrix(
        spec, (operator.domain, operator.domain_space),
        (operator.codomain, operator.codomain_space))
    difference = operator.entries - expected.entries
    weights = operator.codomain_space.weights(operator.codomain)
    defects = numpy.sqrt(weights @ numpy.abs(difference) ** 2)
    worst = int(numpy.argmax(defects))
    return WCODefect(float(defects[worst]),
                     MultiIndex(operator.domain.exponents[worst]), defects)


# Exponential probes

def probe_nodes(n, radii=PROBE_RADII, points=PROBE_NODES):
    """Tensor grid of the origin and the rings, per variable."""
    ring = numpy.exp(2j * numpy.pi * numpy.arange(points) / points)
    axis = numpy.concatenate([[0j]] + [r * ring for r in radii])
    grids = numpy.meshgrid(*([axis] * n), indexing="ij")
    return numpy.stack([grid.reshape(-1) for grid in grids], axis=1)


ProbeResult = collections.namedtuple(
    "ProbeResult", "w min_modulus location floor vanishing tail")
ProbeReport = collections.namedtuple("ProbeReport", "probes witness")


def exp_probe(operator, w_samples, radii=PROBE_RADII, points=PROBE_NODES,
              floor=DEFAULT_TOLERANCES.nonvanishing_floor,
              tail_tol=DEFAULT_TOLERANCES.tail):
    """Minimum modulus of T(exp(w . z)) over the probe nodes.

    A vanishing image is a witness that T is not a weighted composition
    operator. The domain cap must keep the exponential tail below
    ``tail_tol``.
    """
    trunc = operator.domain
    norms = shift_norms(operator.domain_space, trunc)
    nodes = probe_nodes(operator.codomain.n, radii, points)
    probes, witness = [], None
    for w in w_samples:
        w = numpy.asarray(w, dtype=complex).reshape(-1)
        s = float(numpy.dot(numpy.abs(w), norms))
        tail = exponential_tail(s, trunc.degree_cap)
        if tail > tail_tol:
            raise InsufficientCapError(
                "Exponential tail {:.3g} at w={} exceeds {:.3g}".format(
                    tail, w.tolist(), tail_tol), w=w.tolist(), tail=tail)
        image = operator.apply(exp_linear(trunc, w))
        modulus = numpy.abs(image.evaluate(nodes))
        index = int(numpy.argmin(modulus))
        scale = float(numpy.abs(image.coeffs).sum())
        bound = floor * max(scale, 1e-300)
        probe = ProbeResult(
            tuple(w), float(modulus[index]), tuple(nodes[index]), bound,
            bool(modulus[index] <= bound), tail)
        probes.append(probe)
        if probe.vanishing and witness is None:
            witness = probe
            logger.info("Exponential probe vanishes at {} for w={}".format(
                nodes[index].tolist(), w.tolist()))
    return ProbeReport(probes, witness)


# Composition bound

CompositionBound = collections.namedtuple(
    "CompositionBound", "p b0 bound ratios max_ratio holds")


def _hardy_p_norm(f, p, radii):
    # sup over the schedule and the torus, exact nodes for the degree
    nodes = next_power_of_two(4 * max(f.degree(), 1) + 1)
    return max(p_mean(QuadratureRule(f.n, nodes, r), f, p)
               for r in tuple(radii) + (1.0,))


def composition_bound_check(b, p, samples, radii=None, tol=BOUND_TOL):
    """Compare ||f o b||_p with ((1+|b(0)|)/(1-|b(0)|))^(1/p) ||f||_p.

    Args:
        b: the symbol, one series over m variables (or a 1-tuple).
        samples: one-variable polynomials f.
    """
    if isinstance(b, (tuple, list)):
        if len(b) != 1:
            raise DimensionError("The bound concerns one-variable sources")
        b = b[0]
    if not p >= 1:
        raise PreconditionError("p must be at least 1, got {}".format(p))
    b0 = abs(b.constant_term)
    if b0 >= 1:
        raise PreconditionError("|b(0)| = {} is not below 1".format(b0))
    radii = default_radii() if radii is None else radii
    bound = ((1 + b0) / (1 - b0)) ** (1.0 / p)
    ratios = []
    top = max(b.degree(), 1)
    for f in samples:
        if f.n != 1:
            raise DimensionError("Samples must be one-variable functions")
        exact = b.lift(max(f.degree(), 0) * top)
        image = series_compose(f, (exact,))
        source = _hardy_p_norm(f, p, radii)
        target = _hardy_p_norm(image, p, radii)
        ratios.append(target / source if source else 0.0)
    worst = max(ratios) if ratios else 0.0
    return CompositionBound(p, b0, bound, ratios, worst, worst <= bound + tol)


def random_polynomials(rng, count, degree=6):
    """One-variable polynomials with coefficients in the unit box."""
    trunc = Truncation(1, degree)
    return [TruncatedSeries(trunc, rng.uniform(-1, 1, trunc.size) +
                            1j * rng.uniform(-1, 1, trunc.size))
            for _ in range(count)]


# Cyclicity preservation

PreservationRow = collections.namedtuple(
    "PreservationRow", "label verdict_in verdict_out violation")
PreservationReport = collections.namedtuple(
    "PreservationReport", "rows violations wco_defect hardy_codomain")


def default_family(trunc):
    """Envelope polynomials, exponentials and a non-cyclic polynomial."""
    family = []
    for i in range(trunc.n):
        z = TruncatedSeries.variable(trunc, i)
        for beta in (1, 2, 1 + 1j):
            family.append(("z{} - {}".format(i + 1, beta), z - beta))
        for w in (1, 4):
            exponent = numpy.zeros(trunc.n)
            exponent[i] = w
            family.append(("exp({}*z{})".format(w, i + 1),
                           exp_linear(trunc, exponent)))
    family.append(("z1 - 0.5", TruncatedSeries.variable(trunc, 0) - 0.5))
    return family


def cyclicity_preservation_suite(operator, family=None, degree_max=12,
                                 tol=DEFAULT_TOLERANCES):
    """Cross-tabulate cyclicity verdicts of f and T f."""
    family = default_family(operator.domain) if family is None else family
    rows, violations = [], []
    for label, f in family:
        verdict_in = cyclicity_curve(
            f, operator.domain_space, degree_max, tol).verdict
        image = operator.apply(f)
        if image.is_zero(tol.coefficient):
            verdict_out = "zero-image"
        else:
            verdict_out = cyclicity_curve(
                image, operator.codomain_space, degree_max, tol).verdict
        violation = verdict_in == CYCLIC and verdict_out in (
            NON_CYCLIC, "zero-image")
        row = PreservationRow(label, verdict_in, verdict_out, violation)
        rows.append(row)
        if violation:
            violations.append(label)
            logger.info("Cyclic input {} has a non-cyclic image".format(
                label))
    try:
        defect = verify_wco(operator, recover_wco(operator)).value
    except (DivisionError, PreconditionError) as exc:
        logger.debug("No weighted composition structure: {}".format(exc))
        defect = None
    return PreservationReport(
        rows, violations, defect, operator.codomain_space.hardy_type)


# Norms

def operator_norm(operator):
    """Largest singular value in the weighted coefficient norms."""
    source = numpy.sqrt(operator.domain_space.weights(operator.domain))
    target = numpy.sqrt(operator.codomain_space.weights(operator.codomain))
    scaled = (target[:, None] * operator.entries) / source[None, :]
    return float(numpy.linalg.norm(scaled, 2))


NormLadder = collections.namedtuple("NormLadder", "caps norms growth")


def norm_ladder(build, caps=NORM_LADDER):
    """Finite matrix norms across truncations.

    Args:
        build: callable mapping a degree cap to an OperatorMatrix.
    """
    norms = [operator_norm(build(cap)) for cap in caps]
    growth = norms[-1] / norms[0] if norms[0] else float("inf")
    return NormLadder(tuple(caps), tuple(norms), growth)


# Named operators

def identity_operator(trunc, spec):
    return OperatorMatrix(
        (trunc, spec), (trunc, spec), numpy.eye(trunc.size), None)


def rudin_operator(domain_cap, codomain_cap):
    """f -> f((1+z)/2, (1+z)/2) from two variables to one."""
    target = Truncation(1, codomain_cap)
    half = (TruncatedSeries.one(target) +
            TruncatedSeries.variable(target, 0)) / 2
    spec = WCOSpec(TruncatedSeries.one(target), (half, half))
    return wco_matrix(spec, (Truncation(2, domain_cap), SpaceSpec.hardy(2)),
                      (target, SpaceSpec.hardy(1)))


def averaging_operator(trunc, spec):
    """f -> (f(z/2) + f(-z/2)) / 2: not a weighted composition."""
    one = TruncatedSeries.one(trunc)
    result = None
    for sign in (0.5, -0.5):
        symbol = [sign * TruncatedSeries.variable(trunc, i)
                  for i in range(trunc.n)]
        term = 0.5 * wco_matrix(
            WCOSpec(one, symbol), (trunc, spec), (trunc, spec))
        result = term if result is None else result + term
    return result

