"""Provide class objects for declaring report stages."""

# Imports
from functools import partial

# Local imports
from polydisc.graph import Node, entry
from polydisc.exception import context


# Base class object


class class_object(object):
    """Provide a base for objects to be processed by ReportMeta."""

    key = None

    # Methods to override

    def update_class(self, key, dct):
        self.key = key

    def configure(self, report):
        pass  # pragma: no cover

    def connect(self, report):
        pass  # pragma: no cover

    # Representation

    def __repr__(self):
        key = self.key if self.key else "unnamed"
        return "{} <{}>".format(type(self).__name__, key)


# Node object


class node_object(class_object):
    def __init__(self, description=None):
        self.description = description

    def configure(self, report):
        node = Node(self.key, self.description)
        report.graph.add_node(node)

    # Binding helper

    @staticmethod
    def bind_node(report, node, bind, method, standard_aggregation=True):
        if not method:
            raise ValueError("No update method defined")
        if not bind:
            raise ValueError("No binding defined")
        # Set the binding
        aggregate = (
            report._standard_aggregation
            if standard_aggregation
            else report._custom_aggregation
        )
        func = partial(aggregate, node, method.__get__(report))
        report.graph.add_rule(node, func, bind)


# Input stage


class input_stage(node_object):
    """Report stage computed from the report configuration.

    Use it as a decorator to set the method computing the value. The
    method may return a plain value or an `entry` carrying flags.
    """

    def __init__(self, description=None):
        super(input_stage, self).__init__(description)
        self.method = None

    def __call__(self, method):
        self.method = method
        if self.description is None and method.__doc__:
            self.description = method.__doc__.strip().splitlines()[0]
        return self

    def connect(self, report):
        if not self.method:
            return
        node = report.graph[self.key]
        # Get result
        try:
            with context("computing", node):
                result = self.method.__get__(report)()
            if not isinstance(result, entry):
                result = entry(result)
        # Set exception
        except Exception as exc:
            report.register_exception(exc)
            node.set_exception(exc)
        # Set result
        else:
            node.set_result(result)


# Computed stage


class stage(input_stage):
    """Report stage computed from the values of other stages.

    Use it as a decorator to register the function making the computation.

    Args:
        bind (list of str):
            List of stage names to bind to. It has to contain at least one
            name.
        standard_aggregation (optional, bool):
            Pass the values of the bound stages (True, default) or the
            nodes themselves (False).
    """

    def __init__(self, bind, standard_aggregation=True, description=None):
        super(stage, self).__init__(description)
        self.bind = bind
        self.standard_aggregation = standard_aggregation

    def configure(self, report):
        super(stage, self).configure(report)
        node = report.graph[self.key]
        self.bind_node(
            report, node, self.bind, self.method, self.standard_aggregation
        )

    def connect(self, report):
        # Override the input_stage connect method
        pass
