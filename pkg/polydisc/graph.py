"""Provide the stage graph computing a report.

A report is a one-shot computation: every stage node is bound to the
stages it reads, the bindings are sorted once when the graph is built,
and setting an input sweeps the pending stages forward in that order.
"""

# Imports

import warnings
import collections
from functools import partial
from collections.abc import Mapping


# Constants

VALID, FLAGGED, INVALID = 0, 1, 2
QUALITY_NAMES = {VALID: "VALID", FLAGGED: "FLAGGED", INVALID: "INVALID"}


# Entry object


class entry(collections.namedtuple("entry", "value flags quality")):
    """Result of a stage.

    A flagged entry is at least FLAGGED. A missing value makes the entry
    INVALID, and an INVALID entry never carries a value.
    """

    __slots__ = ()

    def __new__(cls, value, flags=(), quality=VALID):
        if isinstance(value, entry):
            raise TypeError("The value cannot be an entry")
        if isinstance(flags, str):
            flags = (flags,)
        flags = tuple(flags)
        if not all(isinstance(flag, str) for flag in flags):
            raise TypeError("The flags are not strings")
        if quality not in QUALITY_NAMES:
            raise TypeError("Unknown quality {!r}".format(quality))
        if flags and quality == VALID:
            quality = FLAGGED
        if value is None or quality == INVALID:
            value, quality = None, INVALID
        return super(entry, cls).__new__(cls, value, flags, quality)

    @property
    def quality_name(self):
        return QUALITY_NAMES[self.quality]


def aggregate_qualities(qualities):
    return max(qualities, default=VALID)


def merge_flags(*groups):
    result = []
    for group in groups:
        result.extend(flag for flag in group if flag not in result)
    return tuple(result)


# Stage node


class Node(object):
    """Graph node holding either an entry or the exception raised instead."""

    def __init__(self, name, description=None):
        self.name = name
        self.description = description or name
        self.callbacks = []
        self._result = None
        self._exception = None

    def set_result(self, result):
        if result is not None and not isinstance(result, entry):
            raise TypeError("Not an entry (or None)")
        self._result, self._exception = result, None
        self.notify()

    def set_exception(self, exception):
        if not isinstance(exception, BaseException):
            raise TypeError("Not a valid exception")
        self._result, self._exception = None, exception
        self.notify()

    def result(self):
        if self._exception is not None:
            raise self._exception
        return self._result

    def exception(self):
        return self._exception

    def notify(self):
        for callback in self.callbacks:
            try:
                callback(self)
            except Exception as exc:
                message = "Node {} failed to notify: {!r}"
                warnings.warn(message.format(self.name, exc))

    def __repr__(self):
        return "node <{}>".format(self.name)


# Stage graph


class Graph(Mapping):
    """Mapping of named stage nodes with their update rules."""

    def __init__(self):
        self._nodes = {}
        self._rules = {}
        self._updates = {}
        self._subscribers = collections.defaultdict(list)
        self._order = []
        self._pending = set()
        self._sweeping = False

    # Declaring

    def add_node(self, node):
        if node.name in self._nodes:
            message = "A node called {} already exists"
            raise ValueError(message.format(node.name))
        self._nodes[node.name] = node

    def add_rule(self, node, func, bind):
        if self._nodes.get(node.name) is not node:
            message = "The node {!r} is not in the graph"
            raise ValueError(message.format(node))
        if node in self._rules:
            message = "A rule for {} already exists"
            raise ValueError(message.format(node.name))
        self._rules[node] = func, tuple(bind)

    # Building

    def build(self):
        """Check the bindings and fix the update order."""
        for node, (func, bind) in self._rules.items():
            missing = [name for name in bind if name not in self._nodes]
            if missing:
                msg = "{} is bound to unknown node(s) {}"
                raise ValueError(msg.format(node, ", ".join(missing)))
            publishers = [self._nodes[name] for name in bind]
            self._updates[node] = partial(func, *publishers)
            for publisher in publishers:
                if node not in self._subscribers[publisher]:
                    self._subscribers[publisher].append(node)
        self._order = self._sorted()
        for publisher in self._subscribers:
            publisher.callbacks.append(self.callback)

    def _sorted(self):
        # Depth first over the bindings, in declaration order
        order, visiting, done = [], set(), set()

        def visit(node):
            if node in done:
                return
            if node in visiting:
                msg = "{} is involved in a cyclic dependency"
                raise ValueError(msg.format(node))
            visiting.add(node)
            for name in self._rules.get(node, ((), ()))[1]:
                visit(self._nodes[name])
            visiting.discard(node)
            done.add(node)
            order.append(node)

        for node in self._nodes.values():
            visit(node)
        return order

    @property
    def order(self):
        return [node.name for node in self._order]

    # Sweeping

    def callback(self, node):
        self._pending.update(self._subscribers[node])
        if not self._sweeping:
            self.sweep()

    def sweep(self):
        # Subscribers always come after their publishers in the order
        self._sweeping = True
        try:
            for node in self._order:
                if node in self._pending:
                    self._pending.discard(node)
                    self.update(node)
        finally:
            self._sweeping = False

    def update(self, node):
        try:
            node.set_result(self._updates[node]())
        except Exception as exc:
            node.set_exception(exc)

    # Mapping interface

    def __getitem__(self, key):
        return self._nodes[key]

    def __iter__(self):
        return iter(self._nodes)

    def __len__(self):
        return len(self._nodes)
