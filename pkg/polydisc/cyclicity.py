"""Optimal polynomial approximants and the outer function test.

A function f is cyclic when 1 lies in the closure of its polynomial
multiples. At truncation scale this is probed through the distances
``d_N = min ||p f - 1||`` over polynomials p of degree at most N, which are
nonincreasing in N. Verdicts are labeled ``-consistent``: a finite curve
never proves cyclicity.
"""

# Imports
import logging
import collections

import numpy
from scipy import linalg

from polydisc.series import (
    Truncation, TruncatedSeries, exp_linear, exponential_tail)
from polydisc.spaces import (
    inner, norm, shift_norms, torus_mean, p_distance)
from polydisc.exception import (
    PreconditionError, SingularGramError, NumericalError,
    InsufficientCapError, DimensionError)
from polydisc.utils import DEFAULT_TOLERANCES, default_radii

# Logging
logger = logging.getLogger(__name__)

# Verdicts
CYCLIC = "cyclic-consistent"
NON_CYCLIC = "non-cyclic-consistent"
OUTER, NOT_OUTER, INCONCLUSIVE = "Outer", "NotOuter", "Inconclusive"

# Curve heuristics
MONOTONE_SLACK = 1e-9
DECAY_SLOPE = -0.1
PLATEAU_WINDOW = 3
JITTER = 1e-12

# Exponential checks
MAX_EXP_CAP = 60
SHIFT_NORM_CAP = 32

# Outer test
CLIPPED_LIMIT = 0.01
FIBRE_TOL = 1e-10
DEFAULT_NODES = {1: 256, 2: 256, 3: 32}


# Gram solve

def solve_gram(matrix, rhs, tol=DEFAULT_TOLERANCES.gram_residual):
    """Solve a Hermitian positive definite system by Cholesky.

    On failure the diagonal is jittered by ``1e-12 * trace / size`` and the
    factorisation retried once.
    """
    size = len(matrix)
    try:
        factor = linalg.cho_factor(matrix)
    except linalg.LinAlgError:
        jitter = JITTER * abs(numpy.trace(matrix)) / size
        logger.debug("Cholesky failed, retrying with jitter {:.3g}".format(
            jitter))
        try:
            factor = linalg.cho_factor(matrix + jitter * numpy.eye(size))
        except linalg.LinAlgError:
            condition = float(numpy.linalg.cond(matrix))
            raise SingularGramError(
                "Singular Gram matrix (condition {:.3g})".format(condition),
                condition=condition)
    solution = linalg.cho_solve(factor, rhs)
    residual = numpy.linalg.norm(matrix @ solution - rhs)
    if residual > tol * numpy.linalg.norm(rhs):
        logger.warning("Gram residual {:.3g} above {:.3g} relative".format(
            residual, tol))
    return solution


# Approximants

Approximant = collections.namedtuple(
    "Approximant", "degree distance p condition")


def multiple_columns(f, degree):
    """Coefficient columns of z^alpha f, |alpha| <= degree.

    ``f`` is taken as the polynomial its stored coefficients define and
    is lifted to the cap ``degree + deg f``, so every product is exact
    whatever the cap of ``f``. A truncated series keeps its truncation:
    the discarded tail is not part of the columns.
    """
    if f.is_zero():
        raise PreconditionError("The zero function has no approximants")
    working = f.lift(degree + f.degree())
    trunc = working.trunc
    multipliers = Truncation(f.n, degree)
    support = numpy.flatnonzero(working.coeffs)
    columns = numpy.zeros((trunc.size, multipliers.size), dtype=complex)
    for j, alpha in enumerate(multipliers.exponents):
        positions = trunc.locate(trunc.exponents[support] + alpha)
        columns[positions, j] = working.coeffs[support]
    return columns, trunc, multipliers


def approximant_distance(f, spec, degree,
                         tol=DEFAULT_TOLERANCES.gram_residual):
    """Distance from 1 to the multiples p f with deg p <= degree.

    The normal equations ``A c = v`` with ``A = Phi^H W Phi`` and
    ``v = Phi^H W e_0`` are solved by Cholesky; the distance is the weighted
    norm of the residual ``Phi c - e_0``.
    """
    columns, trunc, multipliers = multiple_columns(f, degree)
    weights = spec.weights(trunc)
    matrix = (columns.conj().T * weights) @ columns
    rhs = columns[0].conj() * weights[0]
    coeffs = solve_gram(matrix, rhs, tol)
    residual = columns @ coeffs
    residual[0] -= 1
    distance = float(numpy.sqrt(numpy.sum(weights * numpy.abs(residual) ** 2)))
    condition = float(numpy.linalg.cond(matrix))
    return Approximant(
        degree, distance, TruncatedSeries(multipliers, coeffs), condition)


# Curves

class ApproximantResult(collections.namedtuple(
        "ApproximantResult",
        "f spec degrees distances optimal_p conditions verdict slope")):
    __slots__ = ()

    def to_csv(self):
        lines = ["N,d_N,cond"]
        for row in zip(self.degrees, self.distances, self.conditions):
            lines.append("{},{!r},{!r}".format(*row))
        return "\n".join(lines) + "\n"


def decay_slope(degrees, distances):
    """Slope of log d_N against log(N + 2) over the second half."""
    start = len(degrees) // 2
    x = numpy.log(numpy.asarray(degrees[start:], dtype=float) + 2)
    y = numpy.log(numpy.maximum(distances[start:], 1e-300))
    if len(x) < 2:
        return 0.0
    return float(numpy.polyfit(x, y, 1)[0])


def curve_verdict(degrees, distances, zero=DEFAULT_TOLERANCES.zero_distance,
                  plateau=DEFAULT_TOLERANCES.plateau):
    last = distances[-1]
    slope = decay_slope(degrees, distances)
    if last <= zero or slope < DECAY_SLOPE:
        return CYCLIC, slope
    window = numpy.asarray(distances[-PLATEAU_WINDOW:])
    if len(window) == PLATEAU_WINDOW and (
            window.max() - window.min() <= plateau * window.max()):
        return NON_CYCLIC, slope
    return INCONCLUSIVE, slope


def cyclicity_curve(f, spec, degree_max, tol=DEFAULT_TOLERANCES):
    """Distances d_N for N = 0..degree_max, with a verdict."""
    points = [approximant_distance(f, spec, degree, tol.gram_residual)
              for degree in range(degree_max + 1)]
    distances = [point.distance for point in points]
    for degree, (a, b) in enumerate(zip(distances, distances[1:]), 1):
        if b > a + MONOTONE_SLACK:
            raise NumericalError(
                "Distance increases at N={}: {:.6g} > {:.6g}".format(
                    degree, b, a), reason="NonMonotoneCurve")
    degrees = list(range(degree_max + 1))
    verdict, slope = curve_verdict(
        degrees, distances, tol.zero_distance, tol.plateau)
    logger.info("Curve up to N={}: d={:.3g}, {}".format(
        degree_max, distances[-1], verdict))
    return ApproximantResult(
        f, spec, degrees, distances, points[-1].p,
        [point.condition for point in points], verdict, slope)


# Exponentials

ExpCyclicity = collections.namedtuple(
    "ExpCyclicity", "w cap tail curve cosine")


def exp_cap(w, spec, tail_tol=1e-10, max_cap=MAX_EXP_CAP):
    """Smallest cap K with sum_{k > K} s^k / k! below tail_tol, where
    s = sum |w_i| ||S_i||."""
    w = numpy.asarray(w, dtype=complex).reshape(-1)
    norms = shift_norms(spec, Truncation(spec.n, SHIFT_NORM_CAP))
    s = float(numpy.dot(numpy.abs(w), norms))
    for cap in range(max_cap + 1):
        tail = exponential_tail(s, cap)
        if tail < tail_tol:
            return cap, tail
    raise InsufficientCapError(
        "Exponential tail {:.3g} above {:.3g} at cap {}".format(
            tail, tail_tol, max_cap), s=s)


def exp_is_cyclic_check(w, spec, degree_max, tail_tol=1e-10,
                        tol=DEFAULT_TOLERANCES):
    """Cyclicity curve of exp(w . z) and the cosine similarity between the
    optimal multiplier and the truncation of exp(-w . z)."""
    w = numpy.asarray(w, dtype=complex).reshape(-1)
    if w.shape != (spec.n,):
        raise DimensionError("Exponent has {} entries, space {}".format(
            len(w), spec.n))
    cap, tail = exp_cap(w, spec, tail_tol)
    f = exp_linear(Truncation(spec.n, cap), w)
    curve = cyclicity_curve(f, spec, degree_max, tol)
    p = curve.optimal_p
    reference = exp_linear(p.trunc, -w)
    scale = norm(spec, p) * norm(spec, reference)
    cosine = abs(inner(spec, p, reference)) / scale if scale else 1.0
    return ExpCyclicity(tuple(w), cap, tail, curve, cosine)


# Outer test

class OuterReport(collections.namedtuple(
        "OuterReport",
        "name lhs radii rhs boundary extrapolated defect verdict flags "
        "clipped_fraction unconverged monotone points_per_circle")):
    __slots__ = ()


def _log_modulus(f, floor, counter):
    # Closed forms are only clipped where log|f| is not finite
    log_floor = numpy.log(floor)
    closed = getattr(f, "log_func", None) is not None

    def func(points):
        if closed:
            values = f.log_modulus(points)
            clipped = ~numpy.isfinite(values)
        else:
            modulus = numpy.abs(f.evaluate(points))
            clipped = ~(modulus >= floor)
            with numpy.errstate(divide="ignore", invalid="ignore"):
                values = numpy.log(modulus)
        counter[0] += int(clipped.sum())
        counter[1] += len(values)
        return numpy.where(clipped, log_floor, values)

    return func


def outer_test(f, radii=None, points_per_circle=None, boundary=True,
               tol=DEFAULT_TOLERANCES, refine=True):
    """Compare log|f(0)| with the torus means of log|f|.

    Means are computed over the radius schedule and, when ``boundary`` is
    set, on the torus itself with half-step shifted nodes. The boundary
    value is computed with K and K/2 outer nodes; NotOuter is only reported
    when both agree within the outer tolerance.
    """
    n = f.n
    radii = tuple(sorted(default_radii() if radii is None else radii))
    if points_per_circle is None:
        points_per_circle = DEFAULT_NODES.get(n, 16)
    f0 = f(numpy.zeros(n))
    if abs(f0) <= tol.log_floor:
        raise PreconditionError(
            "f(0) = {} vanishes, log|f(0)| undefined".format(f0),
            reason="ZeroAtOrigin")
    lhs = float(numpy.log(abs(f0)))
    counter = [0, 0]
    func = _log_modulus(f, tol.log_floor, counter)
    flags, unconverged = [], 0

    def mean(radius, nodes):
        return torus_mean(func, n, radius, nodes, shifted=True,
                          refine=refine, tol=FIBRE_TOL)

    rhs = []
    for radius in radii:
        result = mean(radius, points_per_circle)
        unconverged += result.unconverged
        rhs.append(result.value)
    monotone = all(b >= a - MONOTONE_SLACK for a, b in zip(rhs, rhs[1:]))
    if not monotone:
        flags.append("quadrature-nonmonotone")
        logger.warning("Radial log means decrease: {}".format(rhs))
    value, stable = None, True
    if boundary:
        fine = mean(1.0, points_per_circle)
        coarse = mean(1.0, max(1, points_per_circle // 2))
        unconverged += fine.unconverged
        value = fine.value
        stable = abs(fine.value - coarse.value) <= tol.outer
        if not stable:
            flags.append("boundary-unstable")
        if rhs and value < rhs[-1] - MONOTONE_SLACK:
            flags.append("quadrature-nonmonotone")
    extrapolated = value if value is not None else rhs[-1]
    defect = lhs - extrapolated
    clipped = counter[0] / counter[1] if counter[1] else 0.0
    if unconverged:
        flags.append("fibres-unconverged")
    if defect > tol.outer:
        flags.append("positive-defect")
        logger.warning("Positive outer defect {:.3g}".format(defect))
    if clipped > CLIPPED_LIMIT:
        flags.append("clipped")
        verdict = INCONCLUSIVE
    elif abs(defect) <= tol.outer:
        verdict = OUTER
    elif defect < -tol.outer and stable:
        verdict = NOT_OUTER
    else:
        verdict = INCONCLUSIVE
    logger.info("Outer test on {}: defect {:.3g}, {}".format(
        f, defect, verdict))
    return OuterReport(
        str(getattr(f, "name", f)), lhs, radii, tuple(rhs), value,
        extrapolated, defect, verdict, tuple(flags), clipped, unconverged,
        monotone, points_per_circle)


# Quadrature residuals

def approximant_p_residual(f, p, rule, exponent):
    """Quadrature value of ||p f - 1|| in the p-mean metric, for a given
    multiplier p (no minimisation)."""
    rule.check(f)
    rule.check(p)
    product = _Product(f, p)
    one = TruncatedSeries.one(Truncation(f.n, 0))
    return p_distance(rule, product, one, exponent)


class _Product(collections.namedtuple("_Product", "f g")):
    __slots__ = ()

    @property
    def n(self):
        return self.f.n

    def evaluate(self, points):
        return self.f.evaluate(points) * self.g.evaluate(points)
