"""Contain the tests for the approximants and the outer test."""

# Imports
import math

import numpy
import pytest

from polydisc import cyclicity
from polydisc.builtins import evaluator
from polydisc.series import Truncation, TruncatedSeries, Evaluator, exp_linear
from polydisc.spaces import SpaceSpec, QuadratureRule, norm, shift_norms
from polydisc.functionals import random_series
from polydisc.cyclicity import (
    CYCLIC, NON_CYCLIC, OUTER, NOT_OUTER, INCONCLUSIVE, Approximant,
    solve_gram, multiple_columns, approximant_distance, cyclicity_curve,
    curve_verdict, exp_cap, exp_is_cyclic_check, outer_test,
    approximant_p_residual)
from polydisc.exception import (
    PreconditionError, SingularGramError, NumericalError,
    InsufficientCapError, DimensionError)


def linear(n, constant, coefficients, cap):
    trunc = Truncation(n, cap)
    f = TruncatedSeries.constant(trunc, constant)
    for i, c in enumerate(coefficients):
        f = f + c * TruncatedSeries.variable(trunc, i)
    return f


def test_solve_gram():
    matrix = numpy.array([[2.0, -1.0], [-1.0, 2.0]])
    solution = solve_gram(matrix, numpy.array([1.0, 0.0]))
    assert numpy.allclose(solution, [2 / 3, 1 / 3])
    # Semi-definite: one jittered retry
    matrix = numpy.ones((2, 2))
    solution = solve_gram(matrix, numpy.array([2.0, 2.0]))
    assert numpy.allclose(matrix @ solution, [2, 2], atol=1e-6)
    with pytest.raises(SingularGramError) as context:
        solve_gram(-numpy.eye(2), numpy.ones(2))
    assert context.value.reason == "SingularGram"


def test_multiple_columns():
    f = linear(1, 1, [-1], 4)
    columns, trunc, multipliers = multiple_columns(f, 2)
    assert trunc == Truncation(1, 3)
    assert multipliers == Truncation(1, 2)
    assert columns.shape == (4, 3)
    assert numpy.allclose(columns[:, 1], [0, 1, -1, 0])
    assert numpy.allclose(columns[:, 2], [0, 0, 1, -1])
    # Stored below N + deg f: lifted, the products stay exact
    f = linear(1, 1, [-1], 1)
    columns, trunc, _ = multiple_columns(f, 3)
    assert trunc == Truncation(1, 4)
    assert numpy.allclose(columns[:, 3], [0, 0, 0, 1, -1])
    # A truncated series is used as stored
    exp = exp_linear(Truncation(1, 2), [1])
    columns, trunc, _ = multiple_columns(exp, 1)
    assert trunc == Truncation(1, 3)
    assert numpy.allclose(columns[:, 1], [0, 1, 1, 0.5])
    with pytest.raises(PreconditionError):
        multiple_columns(TruncatedSeries.zeros(Truncation(1, 2)), 2)


def test_distance_to_one():
    hardy = SpaceSpec.hardy(1)
    result = approximant_distance(TruncatedSeries.one(Truncation(1, 3)),
                                  hardy, 3)
    assert isinstance(result, Approximant)
    assert result.distance == pytest.approx(0, abs=1e-12)
    assert result.p.coefficient((0,)) == pytest.approx(1)
    # |1 - p (1 - z)|^2 >= 1 / (N + 2)
    f = linear(1, 1, [-1], 1)
    for degree in range(8):
        result = approximant_distance(f, hardy, degree)
        assert result.distance ** 2 == pytest.approx(1 / (degree + 2))


def test_curve_of_cyclic_function():
    f = linear(1, 1, [-1], 1)
    result = cyclicity_curve(f, SpaceSpec.hardy(1), 12)
    assert result.degrees == list(range(13))
    assert result.verdict == CYCLIC
    assert result.slope == pytest.approx(-0.5, abs=0.05)
    assert result.optimal_p.degree_cap == 12
    lines = result.to_csv().splitlines()
    assert lines[0] == "N,d_N,cond"
    assert len(lines) == 14
    N, d, cond = lines[3].split(",")
    assert N == "2"
    assert float(d) == pytest.approx(0.5)
    assert float(cond) >= 1


def test_curve_of_function_with_zero():
    f = linear(1, -0.5, [1], 1)
    result = cyclicity_curve(f, SpaceSpec.hardy(1), 12)
    assert result.verdict == NON_CYCLIC
    assert result.distances[-1] == pytest.approx(math.sqrt(0.75), rel=1e-6)


def test_curve_in_two_variables():
    f = linear(2, 1, [0.3, -0.2j], 2) + 0.1 * TruncatedSeries.monomial(
        Truncation(2, 2), (1, 1))
    curve = cyclicity_curve(f, SpaceSpec.hardy(2), 8)
    assert curve.verdict == CYCLIC
    assert all(b <= a + 1e-9 for a, b in zip(
        curve.distances, curve.distances[1:]))
    # Cyclic functions are outer
    report = outer_test(f, radii=(0.5,), points_per_circle=32)
    assert report.verdict != NOT_OUTER
    assert report.verdict == OUTER


def test_non_monotone_curve(monkeypatch):
    def distance(f, spec, degree, tol):
        return Approximant(degree, [0.5, 0.6][degree], None, 1.0)

    monkeypatch.setattr(cyclicity, "approximant_distance", distance)
    with pytest.raises(NumericalError) as context:
        cyclicity_curve(None, SpaceSpec.hardy(1), 1)
    assert context.value.reason == "NonMonotoneCurve"


def test_curve_verdict():
    degrees = [0, 1, 2, 3]
    assert curve_verdict(degrees, [1, 0.1, 1e-3, 1e-8])[0] == CYCLIC
    assert curve_verdict(degrees, [1, 0.5, 0.5, 0.5])[0] == NON_CYCLIC
    verdict, slope = curve_verdict(degrees, [1, 0.99, 0.98, 0.97])
    assert verdict == INCONCLUSIVE
    assert -0.1 < slope < 0


def test_exp_cap():
    hardy = SpaceSpec.hardy(1)
    assert exp_cap([0], hardy) == (0, 0.0)
    cap, tail = exp_cap([1], hardy)
    assert cap == 13
    assert tail < 1e-10
    # The Dirichlet shift has norm sqrt(2)
    assert exp_cap([1], SpaceSpec.dirichlet(1, 1))[0] > cap
    with pytest.raises(InsufficientCapError):
        exp_cap([100], hardy)


def test_exp_is_cyclic():
    result = exp_is_cyclic_check([0.5], SpaceSpec.hardy(1), 6)
    assert result.w == (0.5,)
    assert result.tail < 1e-10
    assert result.curve.verdict == CYCLIC
    assert result.curve.distances[-1] < 1e-4
    assert result.cosine == pytest.approx(1, abs=1e-3)
    result = exp_is_cyclic_check([0.5, -0.5j], SpaceSpec.drury(2), 3)
    assert result.curve.verdict == CYCLIC
    with pytest.raises(DimensionError):
        exp_is_cyclic_check([0.5], SpaceSpec.hardy(2), 3)


def test_outer_constant():
    f = TruncatedSeries.constant(Truncation(2, 0), 5)
    report = outer_test(f, radii=(0.5, 0.9), points_per_circle=8)
    assert report.lhs == pytest.approx(math.log(5))
    assert report.defect == pytest.approx(0, abs=1e-12)
    assert report.verdict == OUTER
    assert report.flags == ()
    assert report.clipped_fraction == 0


def test_outer_polynomials():
    # No zero in the closed disc
    report = outer_test(linear(1, 1, [-0.5], 1), radii=(0.25, 0.75))
    assert report.verdict == OUTER
    assert report.monotone
    # Zero at 1/2
    report = outer_test(linear(1, -0.5, [1], 1), radii=(0.25, 0.75))
    assert report.lhs == pytest.approx(math.log(0.5))
    assert report.boundary == pytest.approx(0, abs=1e-8)
    assert report.defect == pytest.approx(math.log(0.5), abs=1e-6)
    assert report.verdict == NOT_OUTER
    with pytest.raises(PreconditionError) as context:
        outer_test(linear(1, 0, [1], 1))
    assert context.value.reason == "ZeroAtOrigin"


def test_outer_boundary_zeros_are_clipped():
    # (1 - z1)^16 drops below the floor next to the circle z1 = 1
    f = Evaluator("boundary-zero", 2, lambda z: (1 - z[:, 0]) ** 16)
    report = outer_test(f, radii=(0.5,), points_per_circle=32, refine=False)
    assert report.lhs == 0
    assert 0.01 < report.clipped_fraction < 0.05
    assert "clipped" in report.flags
    assert report.verdict == INCONCLUSIVE


def test_outer_rudin_function():
    f = evaluator("rudin-outer-2d")
    report = outer_test(f, radii=(0.5, 0.9), points_per_circle=64)
    assert report.name == "rudin-outer-2d"
    assert report.lhs == pytest.approx(-1)
    assert report.rhs == pytest.approx((-1, -1), abs=1e-6)
    assert report.boundary == pytest.approx(-1, abs=1e-3)
    assert abs(report.defect) <= 1e-3
    assert report.verdict == OUTER
    assert report.clipped_fraction == 0


def test_outer_rudin_image():
    f = evaluator("rudin-image-1d")
    report = outer_test(f, radii=(0.5, 0.9))
    assert report.lhs == pytest.approx(-3)
    assert report.rhs == pytest.approx((-3, -3), abs=1e-6)
    assert report.boundary == pytest.approx(-1, abs=1e-6)
    assert report.defect == pytest.approx(-2, abs=1e-2)
    assert report.verdict == NOT_OUTER
    assert "boundary-unstable" not in report.flags


def test_p_residual():
    trunc = Truncation(1, 8)
    f = linear(1, 1, [-0.5], 8)
    p = TruncatedSeries(trunc, 0.5 ** numpy.arange(9))
    rule = QuadratureRule(1, 32, 1.0)
    assert approximant_p_residual(f, p, rule, 2) == pytest.approx(2 ** -9)
    assert approximant_p_residual(f, p, rule, 0.5) == pytest.approx(
        2 ** -4.5)
    with pytest.raises(DimensionError):
        approximant_p_residual(f, p, QuadratureRule(2, 32, 1.0), 2)


def test_geometric_decay_outside_the_disc():
    f = linear(1, -2, [1], 1)
    for spec in (SpaceSpec.hardy(1), SpaceSpec.dirichlet(1, 1)):
        curve = cyclicity_curve(f, spec, 24)
        assert curve.verdict == CYCLIC
        # p = -(1 + z/2 + ... + (z/2)^N) / 2 leaves (z/2)^(N+1)
        assert curve.distances[-1] <= math.sqrt(26) * 2 ** -25


def test_random_curves_decrease():
    rng = numpy.random.default_rng(16)
    for trial in range(100):
        n = 1 + trial % 2
        spec = [SpaceSpec.hardy(n), SpaceSpec.dirichlet(n, 1),
                SpaceSpec.drury(n)][trial % 3]
        f = random_series(Truncation(n, 2), rng)
        distances = [approximant_distance(f, spec, degree).distance
                     for degree in range(5)]
        assert distances[0] <= 1 + 1e-12
        assert all(b <= a + 1e-9 for a, b in zip(distances, distances[1:]))


def test_exponential_tail_bound():
    rng = numpy.random.default_rng(17)
    for spec in (SpaceSpec.hardy(2), SpaceSpec.dirichlet(2, 1),
                 SpaceSpec.drury(2)):
        for _ in range(5):
            w = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
            s = float(numpy.dot(
                numpy.abs(w), shift_norms(spec, Truncation(2, 12))))
            full = exp_linear(Truncation(2, 12), w)
            for low in (2, 4, 8):
                part = exp_linear(Truncation(2, low), w).lift(12)
                bound = sum(s ** k / math.factorial(k)
                            for k in range(low + 1, 13))
                assert norm(spec, full - part) <= bound * (1 + 1e-12)
            # The cap chosen for exponentials keeps the tail
            cap, tail = exp_cap(w, spec)
            wide = exp_linear(Truncation(2, cap + 8), w)
            part = exp_linear(Truncation(2, cap), w).lift(cap + 8)
            assert norm(spec, wide - part) <= tail


def test_exp_is_cyclic_in_two_variables():
    result = exp_is_cyclic_check([1, 1], SpaceSpec.drury(2), 6)
    assert result.tail < 1e-10
    assert result.curve.verdict == CYCLIC
    # ||exp(z1 + z2)||^2 = sum 2^k / k!^2 in the Drury-Arveson space
    square = math.fsum(2 ** k / math.factorial(k) ** 2 for k in range(30))
    assert result.curve.distances[0] == pytest.approx(
        math.sqrt(1 - 1 / square), rel=1e-6)
    assert result.curve.distances[-1] < 1e-2


def test_random_cyclic_functions_are_outer():
    rng = numpy.random.default_rng(18)
    for _ in range(10):
        c = 0.25 * rng.uniform(size=2) * numpy.exp(
            2j * numpy.pi * rng.uniform(size=2))
        f = linear(2, 1, [complex(x) for x in c], 1)
        assert cyclicity_curve(f, SpaceSpec.hardy(2), 6).verdict == CYCLIC
        report = outer_test(f, radii=(0.5,), points_per_circle=32)
        assert report.verdict != NOT_OUTER
        assert report.verdict == OUTER


def test_distance_is_scale_invariant():
    rng = numpy.random.default_rng(19)
    for trial in range(20):
        n = 1 + trial % 2
        spec = [SpaceSpec.hardy(n), SpaceSpec.drury(n)][trial % 2]
        f = random_series(Truncation(n, 2), rng)
        c = complex(rng.uniform(0.1, 10) * numpy.exp(
            2j * numpy.pi * rng.uniform()))
        for degree in (0, 2, 4):
            expected = approximant_distance(f, spec, degree).distance
            scaled = approximant_distance(c * f, spec, degree).distance
            assert scaled == pytest.approx(expected, rel=1e-9, abs=1e-12)
