"""Provide the report base class and metaclass."""

# Imports
import logging
import collections

# Graph imports
from polydisc.graph import Graph, entry, aggregate_qualities, merge_flags
from polydisc.graph import INVALID, QUALITY_NAMES

# Exception imports
from polydisc.exception import context, traceback_string, exception_string
from polydisc.exception import ConfigError

# Object imports
from polydisc.objects import class_object

# Utils imports
from polydisc.utils import json_ready, dump_json, DEFAULT_TOLERANCES

# Logging
logger = logging.getLogger(__name__)

TOOL_NAME = "polydisc"


# Report metaclass


class ReportMeta(type):
    """Metaclass for reports."""

    def __new__(metacls, name, bases, dct):
        # Class attribute
        dct["_class_dict"] = class_dict = {}
        # Inheritance
        for base in reversed(bases):
            try:
                base_class_dict = base._class_dict
            except AttributeError:
                continue
            # Copy _class_dict from the bases
            for key, obj in base_class_dict.items():
                # Allow to remove stages by setting them to None
                if key not in dct:
                    class_dict[key] = obj
        # Process class objects
        for key, value in list(dct.items()):
            if isinstance(value, class_object):
                class_dict[key] = value
                value.update_class(key, dct)
        # Create report class
        return type.__new__(metacls, name, bases, dct)


# Report


class Report(metaclass=ReportMeta):
    """Base class for command reports.

    Subclasses declare their computation as `input_stage` and `stage`
    objects. Running the report configures one graph node per stage,
    builds the graph and then computes the inputs, which propagates
    through the bound stages in declaration order.

    Stage failures do not stop the run. They are wrapped with the name of
    the failing stage, recorded in the exception history and forwarded
    to the dependent stages.
    """

    # Command name
    command = None

    # Stage emitted by `to_csv`
    csv_stage = None

    # Stages left out of the emitted report
    hidden = ()

    def __init__(self, config):
        self.config = config
        self._graph = Graph()
        self._exception_history = collections.defaultdict(int)
        self._ran = False

    # Properties

    @property
    def graph(self):
        return self._graph

    @property
    def tolerances(self):
        return getattr(self.config, "tolerances", DEFAULT_TOLERANCES)

    # Exception helpers

    def register_exception(self, exc, msg=None):
        # Log traceback
        logger.debug(traceback_string(exc))
        # Exception as a string
        status = exception_string(exc, wrap=msg)
        logger.warning(status)
        # Save in history
        self._exception_history[status] += 1
        return status

    # Running

    def run(self):
        """Configure, build and compute the report graph."""
        if self._ran:
            return self
        self._ran = True
        # Configure
        for value in self._class_dict.values():
            with context("configuring", value):
                value.configure(self)
        # Build graph
        with context("building", "the {} graph".format(self.command)):
            self._graph.build()
        # Connect
        for value in self._class_dict.values():
            with context("connecting", value):
                value.connect(self)
        logger.info("Report {} computed {} stage(s), {} failed".format(
            self.command, len(self._graph), len(self.failures())))
        return self

    # Aggregation

    def _standard_aggregation(self, node, func, *nodes):
        """Contextualize aggregation and propagate errors automatically."""
        # Forward first exception
        for subnode in nodes:
            if subnode.exception() is not None:
                with context("updating", node):
                    raise subnode.exception()
        # Shortcut for empty nodes
        results = [subnode.result() for subnode in nodes]
        if any(result is None for result in results):
            return
        # Extract values
        values, flags, qualities = zip(*results)
        # Invalid quality
        if any(quality == INVALID for quality in qualities):
            return entry(None, merge_flags(*flags), INVALID)
        # Run function
        try:
            with context("updating", node):
                result = func(*values)
        except Exception as exc:
            self.register_exception(exc)
            raise exc
        logger.debug("Stage {} updated".format(node.name))
        # Entry with its own flags
        if isinstance(result, entry):
            return entry(
                result.value,
                merge_flags(*flags, result.flags),
                aggregate_qualities(qualities + (result.quality,)),
            )
        # Create entry
        return entry(
            result, merge_flags(*flags), aggregate_qualities(qualities))

    def _custom_aggregation(self, node, func, *nodes):
        """Contextualize aggregation."""
        # Run function
        try:
            with context("updating", node):
                result = func(*nodes)
        except Exception as exc:
            self.register_exception(exc)
            raise exc
        # Return result
        if not isinstance(result, entry):
            result = entry(result)
        return result

    # Results

    def results(self):
        """Ordered mapping of stage name to entry (None when failed)."""
        self.run()
        return collections.OrderedDict(
            (name, None if node.exception() else node.result())
            for name, node in self._graph.items()
        )

    def result(self, name):
        """Value of a stage, raising the stage exception if any."""
        self.run()
        result = self._graph[name].result()
        return None if result is None else result.value

    def failures(self):
        return [node for node in self._graph.values() if node.exception()]

    @property
    def failed(self):
        self.run()
        return bool(self.failures())

    def first_exception(self):
        self.run()
        for node in self.failures():
            return node.exception()
        return None

    # Serialization

    def to_dict(self):
        from polydisc import __version__

        stages = {}
        for name, result in self.results().items():
            if name in self.hidden:
                continue
            if result is None:
                failed = self._graph[name].exception() is not None
                stages[name] = {"value": None,
                                "flags": ["failed"] if failed else [],
                                "quality": QUALITY_NAMES[INVALID]}
                continue
            stages[name] = {
                "value": json_ready(result.value),
                "flags": list(result.flags),
                "quality": result.quality_name,
            }
        config = self.config
        return {
            "tool": {"name": TOOL_NAME, "version": __version__},
            "command": self.command,
            "config": json_ready(config.to_json() if hasattr(
                config, "to_json") else config),
            "tolerances": dict(self.tolerances._asdict()),
            "stages": stages,
            "errors": dict(self._exception_history),
        }

    def to_json(self):
        return dump_json(self.to_dict())

    def to_csv(self):
        if self.csv_stage is None:
            raise ConfigError(
                "The {} command has no CSV output".format(self.command))
        return self.result(self.csv_stage).to_csv()

    # Representation

    def __repr__(self):
        return "report <{}>".format(self.command)
