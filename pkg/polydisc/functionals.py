"""Moment functionals and their classification.

A functional is known through its moments ``lambda_a = L(z^a)`` on a
truncation. Its transform ``F(w) = sum lambda_a w^a / a!`` vanishes nowhere
exactly when the functional is a scaled point evaluation, in which case the
moments are ``a * b^alpha``.
"""

# Imports
import logging
import collections

import numpy
from scipy import special

from polydisc.series import (
    Truncation, TruncatedSeries, MultiIndex, series_mul, exponential_tail,
    power_table)
from polydisc.spaces import evaluation_norm
from polydisc.exception import (
    DimensionError, ParseError, PreconditionError)
from polydisc.utils import (
    DEFAULT_TOLERANCES, complex_to_json, complex_from_json)

# Logging
logger = logging.getLogger(__name__)

# Scan defaults
DEFAULT_RADII = (1.0, 2.0, 4.0)
DEFAULT_ANGLES = {1: 64, 2: 64, 3: 16}
DEFAULT_REFINED = 8
REGION_FACTOR = 1.5
NEWTON_STEPS = 60
GROWTH_SLACK = 1e-9
DEFECT_TOL = 1e-9
MEMBERSHIP_LADDER = (8, 16, 32, 64)
DIVERGENCE_RATIO = 0.75


# Growth bound

Growth = collections.namedtuple("Growth", "C rho")


def _growth_weights(growth, trunc):
    rho = numpy.asarray(growth.rho, dtype=float)
    powers = power_table(rho, trunc.degree_cap).real
    return growth.C * numpy.prod(
        powers[numpy.arange(trunc.n), trunc.exponents], axis=1)


# Moment functional

class MomentFunctional(object):
    """Moments of a linear functional on the polynomials of a truncation.

    Args:
        trunc (Truncation): basis of the stored moments.
        moments: complex moments in graded-lex order.
        growth (Growth): optional certified bound
            ``|lambda_a| <= C rho^a``, checked on construction.
    """

    def __init__(self, trunc, moments, growth=None):
        moments = numpy.array(moments, dtype=complex)
        if moments.shape != (trunc.size,):
            raise DimensionError("Expected {} moments, got {}".format(
                trunc.size, moments.shape))
        moments.setflags(write=False)
        self.trunc = trunc
        self.moments = moments
        self.growth = None
        if growth is not None:
            growth = Growth(
                float(growth[0]), tuple(float(r) for r in growth[1]))
            if len(growth.rho) != trunc.n:
                raise DimensionError("Growth has {} radii, expected {}".format(
                    len(growth.rho), trunc.n))
            bound = _growth_weights(growth, trunc)
            excess = numpy.abs(moments) - bound
            if excess.max() > GROWTH_SLACK * max(1.0, bound.max()):
                raise PreconditionError(
                    "Moments violate the growth bound by {:.3g}".format(
                        excess.max()), growth=growth)
            self.growth = growth

    # Constructors

    @classmethod
    def point(cls, trunc, b, a=1.0):
        """Moments a * b^alpha of the scaled evaluation at b."""
        b = numpy.asarray(b, dtype=complex).reshape(-1)
        if b.shape != (trunc.n,):
            raise DimensionError("Point {} has not {} coordinates".format(
                b.tolist(), trunc.n))
        powers = power_table(b, trunc.degree_cap)
        moments = a * numpy.prod(
            powers[numpy.arange(trunc.n), trunc.exponents], axis=1)
        return cls(trunc, moments, Growth(abs(a), tuple(numpy.abs(b))))

    @classmethod
    def averaging(cls, trunc, points, weights=None):
        """Moments of f -> sum_j c_j f(points_j)."""
        points = numpy.asarray(points, dtype=complex).reshape(-1, trunc.n)
        if weights is None:
            weights = numpy.ones(len(points))
        weights = numpy.asarray(weights, dtype=complex)
        moments = sum(
            cls.point(trunc, point, c).moments
            for point, c in zip(points, weights))
        growth = Growth(
            float(numpy.abs(weights).sum()),
            tuple(numpy.abs(points).max(axis=0)))
        return cls(trunc, moments, growth)

    # Properties

    @property
    def n(self):
        return self.trunc.n

    @property
    def degree_cap(self):
        return self.trunc.degree_cap

    def moment(self, alpha):
        return complex(self.moments[self.trunc.index(alpha)])

    def apply(self, p):
        """L(p) for a polynomial p of degree at most the cap."""
        if p.n != self.n:
            raise DimensionError("Functional on {} variables applied to "
                                 "{}".format(self.n, p.n))
        if p.degree() > self.degree_cap:
            raise PreconditionError(
                "Polynomial degree {} exceeds the stored moments".format(
                    p.degree()))
        return complex(numpy.dot(p.lift(self.degree_cap).coeffs, self.moments))

    def scaled(self, c):
        growth = None
        if self.growth is not None:
            growth = Growth(abs(c) * self.growth.C, self.growth.rho)
        return MomentFunctional(self.trunc, c * self.moments, growth)

    def growth_or_estimate(self):
        """Growth bound, or the estimate ``max |lambda|, rho = 1``."""
        if self.growth is not None:
            return self.growth, False
        estimate = Growth(float(numpy.abs(self.moments).max()),
                          (1.0,) * self.n)
        return estimate, True

    def transform_series(self, degree=None):
        """The series of F truncated at ``degree``."""
        degree = self.degree_cap if degree is None else degree
        if degree > self.degree_cap:
            raise PreconditionError(
                "Degree {} exceeds the stored moments ({})".format(
                    degree, self.degree_cap))
        trunc = self.trunc.with_cap(degree)
        factorials = numpy.prod(special.factorial(trunc.exponents), axis=1)
        return TruncatedSeries(trunc, self.moments[:trunc.size] / factorials)

    # JSON

    def to_json(self):
        growth = None
        if self.growth is not None:
            growth = {"C": self.growth.C, "rho": list(self.growth.rho)}
        moments = [dict(alpha=[int(a) for a in alpha],
                        **complex_to_json(value))
                   for alpha, value in zip(self.trunc.exponents, self.moments)]
        return {"n": self.n, "degree_cap": self.degree_cap,
                "moments": moments, "growth": growth}

    @classmethod
    def from_json(cls, data):
        try:
            trunc = Truncation(data["n"], data["degree_cap"])
            entries = data["moments"]
            growth = data.get("growth")
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError("Malformed moments JSON: {!r}".format(exc))
        moments = numpy.zeros(trunc.size, dtype=complex)
        for entry in entries:
            try:
                alpha = MultiIndex(entry["alpha"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError("Malformed moment {!r}: {!r}".format(
                    entry, exc))
            if alpha.n != trunc.n or alpha.order > trunc.degree_cap:
                raise ParseError(
                    "Moment index {} outside truncation {}".format(
                        list(alpha), tuple(trunc)))
            moments[trunc.index(alpha)] = complex_from_json(entry, "moment")
        if growth is not None:
            try:
                growth = Growth(float(growth["C"]),
                                tuple(float(r) for r in growth["rho"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError("Malformed growth {!r}: {!r}".format(
                    growth, exc))
        return cls(trunc, moments, growth)

    def __repr__(self):
        return "MomentFunctional(n={}, cap={}, growth={})".format(
            self.n, self.degree_cap, self.growth)


# Transform

TransformValue = collections.namedtuple("TransformValue", "value tail")


def moment_transform(functional, w, degree=None):
    """Partial sum of F(w) up to total degree ``degree``.

    The tail is ``C * sum_{k > degree} s^k / k!`` with ``s = sum rho_i |w_i|``
    when a growth bound is known, None otherwise.
    """
    series = functional.transform_series(degree)
    value = series(w)
    tail = None
    if functional.growth is not None:
        s = float(numpy.dot(functional.growth.rho,
                            numpy.abs(numpy.asarray(w, dtype=complex))))
        tail = functional.growth.C * exponential_tail(s, series.degree_cap)
    return TransformValue(value, tail)


def _gradient_series(series):
    # Partial derivatives of F, one series per variable
    trunc = series.trunc
    exps = trunc.exponents
    result = []
    for i in range(trunc.n):
        shifted = exps.copy()
        shifted[:, i] += 1
        positions = trunc.locate(shifted)
        kept = positions >= 0
        coeffs = numpy.zeros(trunc.size, dtype=complex)
        coeffs[kept] = series.coeffs[positions[kept]] * shifted[kept, i]
        result.append(TruncatedSeries(trunc, coeffs))
    return result


# Envelope

class Envelope(collections.namedtuple(
        "Envelope", "inside index beta coordinate")):
    """Envelope test of a point against the factors z_i - beta, |beta| >= 1.

    When the point lies outside the open polydisc, ``index`` is the first
    violating coordinate (0-based), ``coordinate`` is b_i and
    ``beta = b_i / |b_i|`` names the violated factor ``z_i - beta``.
    """

    __slots__ = ()

    @property
    def factor(self):
        if self.inside:
            return None
        return "z{} - {}".format(self.index + 1, self.beta)


def envelope_check(b):
    b = numpy.asarray(b, dtype=complex).reshape(-1)
    for i, value in enumerate(b):
        if abs(value) >= 1:
            return Envelope(False, i, complex(value / abs(value)),
                            complex(value))
    return Envelope(True, None, None, None)


# Classification results

class PointEvaluation(collections.namedtuple(
        "PointEvaluation", "a b residual envelope")):
    __slots__ = ()
    verdict = "PointEvaluation"


class VanishingWitness(collections.namedtuple(
        "VanishingWitness", "w value tail certified")):
    __slots__ = ()
    verdict = "VanishingWitness"


class Inconclusive(collections.namedtuple(
        "Inconclusive", "min_value grid")):
    __slots__ = ()
    verdict = "Inconclusive"


# Scan

def scan_grid(n, radii=DEFAULT_RADII, angles=None):
    """Polar tensor grid: per variable, the origin and the rings."""
    angles = angles or DEFAULT_ANGLES.get(n, 16)
    ring = numpy.exp(2j * numpy.pi * numpy.arange(angles) / angles)
    axis = numpy.concatenate([[0j]] + [r * ring for r in radii])
    grids = numpy.meshgrid(*([axis] * n), indexing="ij")
    points = numpy.stack([grid.reshape(-1) for grid in grids], axis=1)
    return points, {"radii": list(radii), "angles": angles}


def _tail(growth, w, degree):
    s = float(numpy.dot(growth.rho, numpy.abs(w)))
    return growth.C * exponential_tail(s, degree)


def _newton(series, gradient, w, tol):
    # Minimum-norm Newton step for one equation in n unknowns
    for _ in range(NEWTON_STEPS):
        value = series(w)
        grad = numpy.array([g(w) for g in gradient])
        size = float(numpy.sum(numpy.abs(grad) ** 2))
        if abs(value) <= tol or size == 0:
            break
        w = w - value * grad.conj() / size
    return w, abs(series(w))


def find_vanishing(functional, radii=DEFAULT_RADII, angles=None,
                   refined=DEFAULT_REFINED, tol=DEFAULT_TOLERANCES.coefficient,
                   tail_tol=DEFAULT_TOLERANCES.quadrature):
    """Scan F on the grid and refine the smallest values by Newton steps.

    A refined point is a witness when it stays in the scanned region, the
    partial sum vanishes within ``tol`` and the truncation tail is below
    ``tail_tol``, both relative to the size of the terms at that point.
    Without a growth bound the tail uses the estimate of
    :meth:`MomentFunctional.growth_or_estimate` and the witness is reported
    as uncertified.

    Returns a VanishingWitness or an Inconclusive result.
    """
    series = functional.transform_series()
    gradient = _gradient_series(series)
    growth, estimated = functional.growth_or_estimate()
    points, grid = scan_grid(functional.n, radii, angles)
    values = numpy.abs(series.evaluate(points))
    order = numpy.argsort(values, kind="stable")
    magnitude = TruncatedSeries(series.trunc, numpy.abs(series.coeffs))
    limit = REGION_FACTOR * max(radii)
    for index in order[:refined]:
        w, value = _newton(series, gradient, points[index], tol)
        if numpy.abs(w).max() > limit:
            continue
        scale = max(1.0, magnitude(numpy.abs(w)).real)
        tail = _tail(growth, w, series.degree_cap)
        if value <= tol * scale and tail <= tail_tol * scale:
            logger.info("Vanishing witness at {} (|F| = {:.3g})".format(
                w.tolist(), value))
            return VanishingWitness(
                tuple(complex(x) for x in w), value, tail, not estimated)
    return Inconclusive(float(values[order[0]]), grid)


def classify(functional, radii=DEFAULT_RADII, angles=None,
             refined=DEFAULT_REFINED, tol=DEFAULT_TOLERANCES.coefficient):
    """Classify a functional as a scaled point evaluation, a functional with
    a vanishing transform, or neither at this scale."""
    if functional.degree_cap < 1:
        raise PreconditionError("Classification needs first order moments")
    a = complex(functional.moments[0])
    if abs(a) <= tol:
        return VanishingWitness((0j,) * functional.n, abs(a), 0.0, True)
    b = tuple(complex(functional.moment(MultiIndex.unit(functional.n, i)) / a)
              for i in range(functional.n))
    fitted = MomentFunctional.point(functional.trunc, b, a)
    residual = float(numpy.abs(functional.moments - fitted.moments).max())
    scale = max(1.0, float(numpy.abs(functional.moments).max()))
    if residual <= tol * scale:
        return PointEvaluation(a, b, residual, envelope_check(b))
    return find_vanishing(functional, radii, angles, refined, tol)


# Multiplicativity

Defect = collections.namedtuple(
    "Defect", "mode value tail excess pairs approximate estimated")


def exhaustive_m0_defect(functional):
    """max |L(z^b z^c) - L(z^b) L(z^c)| over |b| + |c| <= cap."""
    left, right, target = functional.trunc.pairs
    m = functional.moments
    return float(numpy.abs(m[target] - m[left] * m[right]).max())


def multiplicativity_defect(functional, mode, samples=None):
    """Largest multiplicativity defect over pairs of series.

    M0 uses exact products of polynomials (exhaustive monomial pairs when
    no samples are given). M1 and M2 truncate the products at the cap and
    report the bound sum |discarded coefficient| * C rho^alpha next to the
    raw defect; the excess is the part of the defect the bound does not
    explain.
    """
    mode = mode.upper()
    if mode not in ("M0", "M1", "M2"):
        raise ParseError("Unknown multiplicativity mode {!r}".format(mode))
    cap = functional.degree_cap
    if mode == "M0" and samples is None:
        value = exhaustive_m0_defect(functional)
        return Defect(mode, value, 0.0, value, None, False, False)
    samples = list(samples or ())
    if not samples:
        raise PreconditionError("No sample pairs for {}".format(mode))
    growth, estimated = functional.growth_or_estimate()
    wide = functional.trunc.with_cap(2 * cap)
    bound = _growth_weights(growth, wide)
    high = wide.degrees > cap
    worst = Defect(mode, 0.0, 0.0, 0.0, len(samples), mode != "M0", estimated)
    for f, g in samples:
        if mode == "M0" and f.degree() + g.degree() > cap:
            raise PreconditionError(
                "Degree overflow: {} + {} exceeds cap {}".format(
                    f.degree(), g.degree(), cap), reason="DegreeOverflow")
        product = series_mul(f.lift(2 * cap), g.lift(2 * cap))
        kept = product.lift(cap)
        defect = abs(functional.apply(kept) -
                     functional.apply(f.lift(cap)) *
                     functional.apply(g.lift(cap)))
        tail = float(numpy.sum(numpy.abs(product.coeffs[high]) * bound[high]))
        excess = max(0.0, defect - tail)
        worst = worst._replace(
            value=max(worst.value, defect), tail=max(worst.tail, tail),
            excess=max(worst.excess, excess))
    return worst


def random_series(trunc, rng, decay=0.5, degree=None):
    """Random series with coefficients decay^|alpha| times the unit box."""
    degree = trunc.degree_cap if degree is None else degree
    coeffs = (rng.uniform(-1, 1, trunc.size) +
              1j * rng.uniform(-1, 1, trunc.size))
    coeffs *= decay ** trunc.degrees
    coeffs[trunc.degrees > degree] = 0
    return TruncatedSeries(trunc, coeffs)


def m0_samples(trunc, rng, count=16):
    half = trunc.degree_cap // 2
    return [(random_series(trunc, rng, 1.0, half),
             random_series(trunc, rng, 1.0, trunc.degree_cap - half))
            for _ in range(count)]


def m1_samples(trunc, rng, count=16):
    """Polynomial multipliers of low degree against decaying series."""
    low = max(1, trunc.degree_cap // 4)
    return [(random_series(trunc, rng, 1.0, low), random_series(trunc, rng))
            for _ in range(count)]


def m2_samples(trunc, rng, count=16):
    """Pairs of decaying in-space series."""
    return [(random_series(trunc, rng), random_series(trunc, rng))
            for _ in range(count)]


# Equivalence suite

PASS, FAIL = "PASS", "FAIL"

GKZReport = collections.namedtuple(
    "GKZReport", "conditions consistent classification defects domain")


def gkz_equivalence_suite(functional, seed=0, count=16, radii=DEFAULT_RADII,
                          angles=None, tol=DEFAULT_TOLERANCES.coefficient,
                          defect_tol=DEFECT_TOL):
    """Evaluate four equivalent characterisations of point evaluations.

    (i) F has no zero on the scan grid, (ii) the moments fit a * b^alpha,
    (iii) products of decaying series are multiplicative up to the
    truncation bound, (iv) same with polynomial multipliers.
    """
    lambda0 = complex(functional.moments[0])
    if abs(lambda0 - 1) > max(tol, GROWTH_SLACK):
        raise PreconditionError(
            "Functional is not normalized: L(1) = {}".format(lambda0),
            reason="Unnormalized")
    rng = numpy.random.default_rng(seed)
    witness = find_vanishing(functional, radii, angles, tol=tol)
    classification = classify(functional, radii, angles, tol=tol)
    m2 = multiplicativity_defect(
        functional, "M2", m2_samples(functional.trunc, rng, count))
    m1 = multiplicativity_defect(
        functional, "M1", m1_samples(functional.trunc, rng, count))
    conditions = collections.OrderedDict([
        ("i", FAIL if witness.verdict == VanishingWitness.verdict else PASS),
        ("ii", PASS if classification.verdict == PointEvaluation.verdict
         else FAIL),
        ("iii", PASS if m2.excess <= defect_tol else FAIL),
        ("iv", PASS if m1.excess <= defect_tol else FAIL)])
    domain = None
    if classification.verdict == PointEvaluation.verdict:
        domain = "inside" if classification.envelope.inside else "boundary"
    return GKZReport(
        conditions, len(set(conditions.values())) == 1, classification,
        {"M1": m1, "M2": m2}, domain)


# Maximal domain

Membership = collections.namedtuple(
    "Membership", "inside caps norms ratio divergent")


def domain_membership(b, spec, ladder=MEMBERSHIP_LADDER,
                      tol=DEFAULT_TOLERANCES.coefficient):
    """Probe whether evaluation at b stays bounded as the cap grows.

    Norms of the truncated evaluation functional are computed over the
    ladder; increments that do not shrink by at least the divergence ratio
    flag the point as outside the maximal domain.
    """
    norms = [evaluation_norm(spec, b, Truncation(spec.n, cap))
             for cap in ladder]
    increments = numpy.diff(norms)
    ratio = 0.0
    if len(increments) >= 2 and increments[-2] > tol:
        ratio = float(increments[-1] / increments[-2])
    divergent = bool(increments[-1] > tol and ratio >= DIVERGENCE_RATIO)
    return Membership(not divergent, tuple(ladder), tuple(norms), ratio,
                      divergent)
