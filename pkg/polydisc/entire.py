"""Exponents of non-vanishing entire functions of finite growth.

A non-vanishing entire F with ``|F(z)| <= A exp(B r^m)`` on ``(r D)^n`` is
``exp(p)`` for a polynomial p of degree at most m. The exponent is recovered
by continuing log F along rays from the origin and fitting a polynomial of
degree M > m by least squares; the homogeneous parts of degree above m
measure how far the growth claim is from the data.
"""

# Imports
import math
import logging
import collections

import numpy
from scipy import linalg

from polydisc.series import Truncation, TruncatedSeries, power_table
from polydisc.exception import (
    NonVanishingViolation, StepTooCoarse, FitFailed, PreconditionError,
    DimensionError)
from polydisc.utils import DEFAULT_TOLERANCES

# Logging
logger = logging.getLogger(__name__)

# Ray defaults
DEFAULT_STEPS = 64
MAX_STEPS = 2 ** 16
ADAPTIVE_JUMP = numpy.pi / 4
SAMPLE_RADIUS = 2.0
HELD_OUT_RAYS = 4
CONFIRMED, REFUTED = "CONFIRMED", "REFUTED"


# Branch continuation

LogBranch = collections.namedtuple(
    "LogBranch", "direction steps lambdas values")


def _ray_values(func, direction, steps):
    lambdas = numpy.linspace(0.0, 1.0, steps + 1)
    points = lambdas[:, None] * direction[None, :]
    return lambdas, points, func.evaluate(points)


def log_along_ray(func, direction, steps=DEFAULT_STEPS, adaptive=False,
                  floor=DEFAULT_TOLERANCES.nonvanishing_floor,
                  max_steps=MAX_STEPS):
    """Continuous branch of log F(t z) for t in [0, 1].

    Anchored at the principal log of F(0) and continued by principal logs
    of the ratios of consecutive values. Each increment must have modulus
    below pi; with ``adaptive`` set the step count is doubled until every
    increment is below pi / 4.
    """
    direction = numpy.asarray(direction, dtype=complex).reshape(-1)
    if direction.shape != (func.n,):
        raise DimensionError("Direction {} has not {} coordinates".format(
            direction.tolist(), func.n))
    while True:
        lambdas, points, values = _ray_values(func, direction, steps)
        modulus = numpy.abs(values)
        small = ~(modulus > floor)
        if small.any():
            index = int(numpy.argmax(small))
            raise NonVanishingViolation(
                "|F| = {:.3g} below floor at {}".format(
                    modulus[index], points[index].tolist()),
                location=tuple(points[index]))
        increments = numpy.log(values[1:] / values[:-1])
        jump = float(numpy.abs(increments).max(initial=0.0))
        if not adaptive or jump < ADAPTIVE_JUMP:
            break
        if 2 * steps > max_steps:
            raise StepTooCoarse(
                "Increment {:.3g} still above pi/4 with {} steps".format(
                    jump, steps), steps=steps, jump=jump)
        steps *= 2
    if jump >= numpy.pi:
        raise StepTooCoarse(
            "Log increment {:.3g} reaches pi with {} steps".format(
                jump, steps), steps=steps, jump=jump)
    anchor = numpy.log(values[0])
    branch = anchor + numpy.concatenate([[0], numpy.cumsum(increments)])
    return LogBranch(tuple(direction), steps, lambdas, branch)


# Exponent recovery

ExponentFit = collections.namedtuple(
    "ExponentFit",
    "p m degree residual tail_norms tail certificate rays samples rank "
    "held_out")


def default_rays(n, degree, rng):
    """Coordinate directions, the diagonal and 2 C(degree+n, n) random unit
    directions."""
    rays = [numpy.eye(n, dtype=complex)[i] for i in range(n)]
    rays.append(numpy.ones(n, dtype=complex) / math.sqrt(n))
    count = 2 * math.comb(degree + n, n)
    random = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    random /= numpy.linalg.norm(random, axis=1)[:, None]
    rays.extend(random)
    return rays


def monomial_matrix(trunc, points):
    """Values of the basis monomials at the points, one row per point."""
    points = numpy.asarray(points, dtype=complex).reshape(-1, trunc.n)
    powers = power_table(points, trunc.degree_cap)
    values = numpy.ones((len(points), trunc.size), dtype=complex)
    for i in range(trunc.n):
        values *= powers[:, i, trunc.exponents[:, i]]
    return values


def _ray_samples(func, rays, radius, count, steps):
    # Branch values at count + 1 equispaced positions per ray
    points, logs = [], []
    steps = max(steps, count)
    steps += -steps % count
    for ray in rays:
        branch = log_along_ray(func, radius * ray, steps, adaptive=True)
        stride = branch.steps // count
        points.append(branch.lambdas[::stride, None] *
                      numpy.asarray(branch.direction)[None, :])
        logs.append(branch.values[::stride])
    return numpy.concatenate(points), numpy.concatenate(logs)


def recover_exponent(func, m, degree=None, rays=None, seed=0,
                     radius=SAMPLE_RADIUS, steps=DEFAULT_STEPS,
                     tol=DEFAULT_TOLERANCES):
    """Fit p with F = exp(p) and report the homogeneous parts above m.

    Args:
        func: evaluator or series of n variables.
        m: claimed degree bound.
        degree: fit degree M, at least m (defaults to m + 2).
    """
    n = func.n
    degree = m + 2 if degree is None else degree
    if m < 0 or degree < m:
        raise PreconditionError(
            "Fit degree {} must be at least m = {} >= 0".format(degree, m))
    trunc = Truncation(n, degree)
    rng = numpy.random.default_rng(seed)
    rays = default_rays(n, degree, rng) if rays is None else list(rays)
    count = 2 * degree + 2
    points, logs = _ray_samples(func, rays, radius, count, steps)
    if len(points) < trunc.size:
        raise FitFailed("{} samples for {} coefficients".format(
            len(points), trunc.size))
    matrix = monomial_matrix(trunc, points)
    coeffs, _, rank, _ = linalg.lstsq(matrix, logs)
    if rank < trunc.size:
        raise FitFailed("Rank {} below {} coefficients".format(
            rank, trunc.size), rank=rank)
    residual = float(numpy.abs(matrix @ coeffs - logs).max())
    scale = max(1.0, float(numpy.abs(logs).max()))
    if residual > tol.fit * scale:
        raise FitFailed(
            "Fit residual {:.3g} above tolerance; F may vanish off the rays "
            "or the degree is too small".format(residual), residual=residual)
    p = TruncatedSeries(trunc, coeffs)
    norms = p.homogeneous_norms()
    tail_norms = tuple(float(x) for x in norms[m + 1:])
    tail = max(tail_norms, default=0.0)
    certificate = CONFIRMED if tail <= tol.tail else REFUTED
    held_out = held_out_error(func, p, rng, radius)
    logger.info("Exponent fit m={} M={}: residual {:.3g}, tail {:.3g}, "
                "{}".format(m, degree, residual, tail, certificate))
    return ExponentFit(p, m, degree, residual, tail_norms, tail, certificate,
                       len(rays), len(points), int(rank), held_out)


def held_out_error(func, p, rng, radius=SAMPLE_RADIUS,
                   count=HELD_OUT_RAYS):
    """Max relative error of exp(p) against F on fresh random points."""
    n = func.n
    points = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    points *= radius * rng.uniform(size=(count, 1)) / numpy.linalg.norm(
        points, axis=1)[:, None]
    values = func.evaluate(points)
    fitted = numpy.exp(p.evaluate(points))
    return float((numpy.abs(fitted - values) / numpy.abs(values)).max())


# Growth certificates

GrowthCertificate = collections.namedtuple(
    "GrowthCertificate", "A B m radii maxima passed holds")


def torus_grid(n, radius, points):
    circle = radius * numpy.exp(2j * numpy.pi * numpy.arange(points) / points)
    grids = numpy.meshgrid(*([circle] * n), indexing="ij")
    return numpy.stack([grid.reshape(-1) for grid in grids], axis=1)


def check_growth(func, A, B, m, radii=(1.0, 2.0, 4.0), points=16,
                 slack=1e-9):
    """Compare log max |F| on the tori r T^n with log A + B r^m."""
    if not A > 0 or B < 0:
        raise PreconditionError("Growth needs A > 0 and B >= 0")
    maxima, passed = [], []
    for r in radii:
        with numpy.errstate(divide="ignore"):
            logs = numpy.log(numpy.abs(func.evaluate(
                torus_grid(func.n, r, points))))
        top = float(logs.max())
        maxima.append(top)
        passed.append(top <= math.log(A) + B * r ** m + slack)
    return GrowthCertificate(A, B, m, tuple(radii), tuple(maxima),
                             tuple(passed), all(passed))


SchwarzCheck = collections.namedtuple(
    "SchwarzCheck", "C radii bounds maxima holds")


def schwarz_bound_check(p, A, B, m, radii=(0.5, 1.0, 2.0), points=16):
    """Validate |G(z)| <= 2C(1 + 2^m |z|^m) + 3|G(0)| with C = max(log A, B)
    on tori of the given radii."""
    C = max(math.log(A), B)
    origin = abs(p.constant_term)
    bounds, maxima = [], []
    for r in radii:
        bounds.append(2 * C * (1 + 2 ** m * r ** m) + 3 * origin)
        maxima.append(float(numpy.abs(
            p.evaluate(torus_grid(p.n, r, points))).max()))
    holds = all(x <= y for x, y in zip(maxima, bounds))
    return SchwarzCheck(C, tuple(radii), tuple(bounds), tuple(maxima), holds)
