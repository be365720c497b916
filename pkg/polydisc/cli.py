"""Command line front end.

Each command is a :class:`~polydisc.report.Report` whose stages wrap the
numerical modules. Reports are written as deterministic JSON (or CSV for
curves and Gram matrices); errors are written to stderr as JSON and
mapped to exit code 2 (configuration) or 3 (numerical failure).
"""

# Imports
import sys
import logging
import argparse
import collections

import numpy

from polydisc import builtins
from polydisc.graph import entry, INVALID
from polydisc.objects import input_stage, stage
from polydisc.report import Report
from polydisc.series import Evaluator, TruncatedSeries, monomial_label
from polydisc.spaces import (
    SpaceSpec, parse_space, norm, gram, p_mean_profile, QuadratureRule)
from polydisc.functionals import (
    PointEvaluation, classify, multiplicativity_defect,
    gkz_equivalence_suite, domain_membership, GROWTH_SLACK)
from polydisc.cyclicity import (
    cyclicity_curve, multiple_columns, outer_test, approximant_p_residual)
from polydisc.operators import (
    recover_wco, verify_wco, exp_probe, cyclicity_preservation_suite,
    norm_ladder)
from polydisc.entire import (
    recover_exponent, check_growth, schwarz_bound_check)
from polydisc.exception import (
    ParseError, ConfigError, DimensionError, DivisionError, error_payload)
from polydisc.utils import (
    Tolerances, tolerances, parse_float_list, parse_complex_list,
    next_power_of_two, dump_json)

# Logging
logger = logging.getLogger(__name__)

# Defaults
DEFAULT_CAP = 12
DEFAULT_DEGREE_MAX = 12
NOT_REQUESTED = "not-requested"


# Configuration

class RunConfig(collections.namedtuple(
        "RunConfig",
        "command inputs space cap degree_max radii nodes tolerances p seed "
        "out format m degree growth w")):
    """Validated settings of one command run."""

    __slots__ = ()

    @classmethod
    def from_args(cls, args):
        overrides = {}
        for item in args.tol or ():
            key, sep, value = item.partition("=")
            if not sep:
                raise ParseError("Expected --tol name=value, got {!r}".format(
                    item))
            overrides[key.strip().replace("-", "_")] = value
        if args.tol_outer is not None:
            overrides["outer"] = args.tol_outer
        table = tolerances(**overrides)
        if args.cap < 0 or args.degree_max < 0:
            raise ParseError("Caps and degrees must be non-negative")
        radii = None
        if args.radii:
            radii = parse_float_list(args.radii, "radii")
            if not radii or not all(0 < r <= 1 for r in radii):
                raise ParseError("Radii must lie in (0, 1]: {!r}".format(
                    args.radii))
        if args.nodes is not None and args.nodes < 1:
            raise ParseError("Node count must be positive")
        if args.p is not None and not args.p > 0:
            raise ParseError("p must be positive, got {}".format(args.p))
        if args.space is not None:
            parse_space(args.space)
        growth = getattr(args, "growth", None)
        if growth is not None:
            growth = parse_float_list(growth, "growth")
            if len(growth) != 2:
                raise ParseError("Expected --growth A,B")
        w = tuple(parse_complex_list(x, "w")
                  for x in getattr(args, "w", None) or ())
        return cls(args.command, (args.input,), args.space, args.cap,
                   args.degree_max, radii, args.nodes, table, args.p,
                   args.seed, args.out, args.format,
                   getattr(args, "m", None), getattr(args, "degree", None),
                   growth, w)

    def to_json(self):
        data = self._asdict()
        data["tolerances"] = dict(self.tolerances._asdict())
        return data


def default_config(command, source, **kwargs):
    """RunConfig with the command line defaults."""
    values = dict(
        space=None, cap=DEFAULT_CAP, degree_max=DEFAULT_DEGREE_MAX,
        radii=None, nodes=None, tolerances=tolerances(), p=None, seed=0,
        out=None, format="json", m=None, degree=None, growth=None, w=())
    values.update(kwargs)
    if not isinstance(values["tolerances"], Tolerances):
        values["tolerances"] = tolerances(**values["tolerances"])
    return RunConfig(command, (source,), **values)


def _space_for(config, n):
    if config.space is None:
        return SpaceSpec.hardy(n)
    space = parse_space(config.space)
    if space.n != n:
        raise DimensionError(
            "Space {} has {} variables, input has {}".format(
                space, space.n, n))
    return space


def _closed_form(value):
    if isinstance(value, Evaluator):
        return entry(None, ("closed-form",))
    return None


# Reports

class FunctionReport(Report):
    """Reports on one function given as a built-in or a series."""

    hidden = ("function",)

    @input_stage()
    def function(self):
        """Function under study."""
        return builtins.function(self.config.inputs[0], self.config.cap)

    @stage(bind=["function"])
    def space(self, f):
        return _space_for(self.config, f.n)


class NormReport(FunctionReport):
    command = "norm"
    csv_stage = "gram"
    hidden = ("function", "gram")

    @stage(bind=["function", "space"])
    def norm(self, f, space):
        """Coefficient norm in the space."""
        return _closed_form(f) or norm(space, f)

    @stage(bind=["function"])
    def p_profile(self, f):
        """p-means over the radius schedule."""
        if self.config.p is None:
            return entry(None, (NOT_REQUESTED,))
        profile = p_mean_profile(
            f, self.config.p, self.config.radii, self.config.nodes,
            self.tolerances.quadrature)
        flags = () if profile.monotone else ("quadrature-nonmonotone",)
        return entry(profile, flags)

    @stage(bind=["function", "space"])
    def gram(self, f, space):
        """Gram matrix of the multiples z^alpha f."""
        closed = _closed_form(f)
        if closed:
            return closed
        columns, trunc, multipliers = multiple_columns(
            f, self.config.degree_max)
        basis = [TruncatedSeries(trunc, column) for column in columns.T]
        return gram(space, basis)

    @stage(bind=["gram"])
    def gram_health(self, matrix):
        return collections.OrderedDict([
            ("size", matrix.size),
            ("hermitian_defect", matrix.hermitian_defect()),
            ("min_eigenvalue", matrix.min_eigenvalue()),
            ("condition", matrix.condition())])

    def to_csv(self):
        matrix = self.result("gram")
        if matrix is None:
            raise ConfigError("Gram matrices need a series input")
        f = self.result("function")
        labels = ["{}*f".format(monomial_label(alpha))
                  for alpha in f.trunc.with_cap(
                      self.config.degree_max).exponents]
        return matrix.to_csv(labels)


class CyclicityReport(FunctionReport):
    command = "cyclicity"
    csv_stage = "curve"

    @stage(bind=["function", "space"])
    def curve(self, f, space):
        """Optimal approximant distances d_N."""
        return _closed_form(f) or cyclicity_curve(
            f, space, self.config.degree_max, self.tolerances)

    @stage(bind=["function", "curve"])
    def p_residual(self, f, curve):
        """Quadrature p-distance of p f to 1 for the optimal p."""
        if self.config.p is None:
            return entry(None, (NOT_REQUESTED,))
        p = curve.optimal_p
        nodes = self.config.nodes or next_power_of_two(
            2 * (f.degree_cap + p.degree_cap) + 1)
        rule = QuadratureRule(f.n, nodes, 1.0)
        return approximant_p_residual(f, p, rule, self.config.p)


class OuterTestReport(FunctionReport):
    command = "outer"
    space = None

    @stage(bind=["function"])
    def outer(self, f):
        """Outer test."""
        result = outer_test(
            f, self.config.radii, self.config.nodes, tol=self.tolerances)
        return entry(result, result.flags)


class ClassifyReport(Report):
    command = "classify"

    @input_stage()
    def functional(self):
        """Moment functional."""
        return builtins.functional(self.config.inputs[0], self.config.cap)

    @stage(bind=["functional"])
    def classification(self, functional):
        result = classify(functional, tol=self.tolerances.coefficient)
        flags = ()
        if result.verdict == PointEvaluation.verdict and \
                not result.envelope.inside:
            flags = ("b-outside-polydisc",)
        return entry(result, flags)

    @stage(bind=["functional"])
    def m0_defect(self, functional):
        """Exhaustive defect on monomial pairs."""
        return multiplicativity_defect(functional, "M0")

    @stage(bind=["functional"])
    def equivalence(self, functional):
        lambda0 = complex(functional.moments[0])
        if abs(lambda0 - 1) > max(self.tolerances.coefficient, GROWTH_SLACK):
            return entry(None, ("unnormalized",))
        return gkz_equivalence_suite(
            functional, seed=self.config.seed,
            tol=self.tolerances.coefficient)

    @stage(bind=["functional", "classification"])
    def domain(self, functional, result):
        """Maximal domain probe of the fitted point."""
        if result.verdict != PointEvaluation.verdict:
            return entry(None, ("no-point",))
        space = _space_for(self.config, functional.n)
        return domain_membership(result.b, space)


class WCOReport(Report):
    command = "wco"
    hidden = ("operator",)

    @input_stage()
    def operator(self):
        """Operator matrix."""
        space = self.config.space or "h2:n=1"
        return builtins.operator(
            self.config.inputs[0], self.config.cap, space)

    @stage(bind=["operator"])
    def recovered(self, operator):
        """Weight and symbol read from the first columns."""
        try:
            return recover_wco(operator, self.tolerances.nonvanishing_floor)
        except DivisionError as exc:
            logger.info("No weight recovery: {}".format(exc))
            return entry(None, ("weight-vanishes-at-origin",))

    @stage(bind=["operator", "recovered"])
    def verification(self, operator, spec):
        return verify_wco(operator, spec)

    @stage(bind=["operator"])
    def probe(self, operator):
        """Exponential probes."""
        samples = self.config.w
        n = operator.domain.n
        if not samples:
            samples = [(0.0,) * n] + [
                tuple(0.5 * numpy.eye(n)[i]) for i in range(n)]
        return exp_probe(operator, samples, tail_tol=self.tolerances.tail)

    @stage(bind=["operator", "verification", "probe"],
           standard_aggregation=False)
    def verdict(self, operator, verification, probe):
        scale = max(1.0, float(numpy.abs(operator.result().value.entries)
                               .max(initial=0.0)))
        checked = verification.result()
        witness = probe.result()
        if checked is not None and checked.quality != INVALID:
            if checked.value.value <= self.tolerances.coefficient * scale:
                return "WCO"
            return "NOT-WCO"
        if witness is not None and witness.value.witness is not None:
            return "NOT-WCO"
        return "INCONCLUSIVE"

    @stage(bind=["operator"])
    def preservation(self, operator):
        """Cyclicity verdicts of f and T f."""
        return cyclicity_preservation_suite(
            operator, degree_max=self.config.degree_max, tol=self.tolerances)

    @stage(bind=["operator"])
    def norms(self, operator):
        """Finite matrix norms across caps."""
        space = self.config.space or "h2:n=1"
        return norm_ladder(lambda cap: builtins.operator(
            self.config.inputs[0], cap, space))


class FactorReport(FunctionReport):
    command = "factor"
    space = None

    @stage(bind=["function"])
    def fit(self, f):
        """Exponent fit."""
        if self.config.m is None:
            raise ParseError("The factor command needs --m")
        return recover_exponent(
            f, self.config.m, self.config.degree, seed=self.config.seed,
            tol=self.tolerances)

    @stage(bind=["function"])
    def growth(self, f):
        if self.config.growth is None:
            return entry(None, (NOT_REQUESTED,))
        A, B = self.config.growth
        return check_growth(f, A, B, self.config.m)

    @stage(bind=["fit"])
    def schwarz(self, fit):
        """Growth bound on the fitted exponent."""
        if self.config.growth is None:
            return entry(None, (NOT_REQUESTED,))
        A, B = self.config.growth
        return schwarz_bound_check(fit.p, A, B, fit.m)


# Commands

def cmd_norm(config):
    return NormReport(config).run()


def cmd_cyclicity(config):
    return CyclicityReport(config).run()


def cmd_outer(config):
    return OuterTestReport(config).run()


def cmd_classify(config):
    return ClassifyReport(config).run()


def cmd_wco(config):
    return WCOReport(config).run()


def cmd_factor(config):
    return FactorReport(config).run()


COMMANDS = collections.OrderedDict([
    ("norm", cmd_norm),
    ("cyclicity", cmd_cyclicity),
    ("outer", cmd_outer),
    ("classify", cmd_classify),
    ("wco", cmd_wco),
    ("factor", cmd_factor),
])


# Parser

class ArgumentParser(argparse.ArgumentParser):
    """Argument parser raising `ParseError` instead of exiting."""

    def error(self, message):
        raise ParseError(
            "{}: {}".format(self.prog, message),
            usage=self.format_usage().strip())


def build_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument("--space", help="space descriptor, e.g. h2:n=2")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP,
                        help="degree cap of the truncation")
    common.add_argument("--degree-max", type=int, default=DEFAULT_DEGREE_MAX,
                        help="largest multiplier degree N")
    common.add_argument("--radii", help="comma separated radii in (0, 1]")
    common.add_argument("--nodes", type=int,
                        help="quadrature points per circle")
    common.add_argument("--tol-outer", type=float,
                        help="outer test tolerance")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="override a tolerance (repeatable)")
    common.add_argument("--p", type=float, help="exponent of the p-means")
    common.add_argument("--seed", type=int, default=0,
                        help="seed of the randomized families")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-v", "--verbose", action="count", default=0)
    parser = ArgumentParser(
        prog="polydisc",
        description="Cyclicity and operator computations on the polydisc.")
    commands = parser.add_subparsers(dest="command", required=True)
    helps = {
        "norm": "norm and p-means of a function",
        "cyclicity": "optimal approximant distances",
        "outer": "outer function test",
        "classify": "classify a moment functional",
        "wco": "weighted composition structure of an operator",
        "factor": "exponent of a non-vanishing entire function",
    }
    for name in COMMANDS:
        sub = commands.add_parser(name, parents=[common], help=helps[name])
        sub.add_argument("input", help="built-in descriptor or JSON file")
        if name == "wco":
            sub.add_argument("--w", action="append",
                             help="exponent of a probe (repeatable)")
        if name == "factor":
            sub.add_argument("--m", type=int, help="claimed growth order")
            sub.add_argument("--degree", type=int, help="fit degree")
            sub.add_argument("--growth", help="growth constants A,B")
    return parser


def configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(
        verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level, stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s")


def write_output(text, path=None):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w") as stream:
        stream.write(text)


# Main

def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        configure_logging(args.verbose)
        config = RunConfig.from_args(args)
        report = COMMANDS[config.command](config)
        if report.failed:
            raise report.first_exception()
        if config.format == "csv":
            text = report.to_csv()
        else:
            text = report.to_json()
        write_output(text, config.out)
    except Exception as exc:
        payload = error_payload(exc)
        sys.stderr.write(dump_json(payload))
        return payload["exit_code"]
    return 0
