"""Exceptions raised by radial_restore"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
from typing import Any
from typing import Dict
from typing import Optional


class RestoreError(Exception):
    """Base class for every error reported by the library.

    Subclasses may add fields; :meth:`to_dict` collects them into the
    structured diagnostic printed by the command line tools.
    """

    fields: tuple = ()

    def to_dict(self) -> Dict[str, Any]:
        d: Dict[str, Any] = {"error": type(self).__name__, "message": str(self)}
        for name in self.fields:
            d[name] = getattr(self, name, None)
        return d


# netgraph


class InvalidNetwork(RestoreError, ValueError):
    pass


class NotATree(RestoreError, ValueError):
    pass


class UnknownEdgeId(RestoreError, KeyError):
    fields = ("edge_id",)

    def __init__(self, edge_id: str):
        self.edge_id = edge_id

    def __str__(self):
        return "No such edge {!r}".format(self.edge_id)


class InfeasibleExchange(RestoreError, ValueError):
    fields = ("edge_id", "switch_id")

    def __init__(self, edge_id: str, switch_id: str):
        self.edge_id = edge_id
        self.switch_id = switch_id

    def __str__(self):
        return "Switch {!r} does not cover tree edge {!r}".format(self.switch_id, self.edge_id)


class NotAPermutation(RestoreError, ValueError):
    pass


# mssc / lp


class TooLarge(RestoreError, ValueError):
    fields = ("size", "limit")

    def __init__(self, what: str, size: int, limit: int):
        self.what = what
        self.size = size
        self.limit = limit

    def __str__(self):
        return "{} has size {}, above the limit of {}".format(self.what, self.size, self.limit)


class BadUniformity(RestoreError, ValueError):
    pass


class HorizonExhausted(RestoreError, RuntimeError):
    pass


class BoundViolated(RestoreError, AssertionError):
    fields = ("witness",)

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.witness = witness or {}


class EmptyInstance(RestoreError, ValueError):
    pass


class InfeasibleHorizon(RestoreError, ValueError):
    fields = ("horizon",)

    def __init__(self, message: str, horizon: int):
        super().__init__(message)
        self.horizon = horizon


class Infeasible(RestoreError, RuntimeError):
    pass


class Unbounded(RestoreError, RuntimeError):
    pass


class IterationLimit(RestoreError, RuntimeError):
    fields = ("iterations",)

    def __init__(self, iterations: int):
        self.iterations = iterations

    def __str__(self):
        return "Simplex stopped after {} pivots".format(self.iterations)


# prep


class ParseError(RestoreError, ValueError):
    fields = ("path", "row", "column")

    def __init__(self, message: str, path: str = "", row: int = 0, column: str = ""):
        super().__init__(message)
        self.path = path
        self.row = row
        self.column = column

    def __str__(self):
        where = self.path or "<input>"
        if self.row:
            where += ", row %i" % self.row
        if self.column:
            where += ", column %s" % self.column
        return "{}: {}".format(where, self.args[0])


class MissingRoot(InvalidNetwork):
    pass


class DisconnectedInput(InvalidNetwork):
    fields = ("components",)

    def __init__(self, message: str, components: int = 0):
        super().__init__(message)
        self.components = components


class DuplicateEdge(InvalidNetwork):
    fields = ("edge_id",)

    def __init__(self, message: str, edge_id: str = ""):
        super().__init__(message)
        self.edge_id = edge_id


class MissingCoordinates(RestoreError, ValueError):
    fields = ("vertex_id",)

    def __init__(self, vertex_id: str):
        self.vertex_id = vertex_id

    def __str__(self):
        return "Vertex {!r} has no coordinates".format(self.vertex_id)


# gen


class DegenerateParams(RestoreError, ValueError):
    pass


class NoAugmentation(RestoreError, ValueError):
    pass


# registries


class NoSuchSolver(RestoreError, KeyError):
    fields = ("name",)

    def __init__(self, name):
        self.name = name

    def __str__(self):
        return "No ordering solver named {}".format(self.name)


class NoSuchKernel(RestoreError, KeyError):
    fields = ("name",)

    def __init__(self, name):
        self.name = name

    def __str__(self):
        return "No such kernel named {}".format(self.name)
