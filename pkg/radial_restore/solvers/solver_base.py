"""Ordering solver base class"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
from abc import ABC
from abc import ABCMeta
from abc import abstractmethod
from typing import Any
from typing import Dict

from traitlets import Integer
from traitlets.config import LoggingConfigurable

from ..mssc import MsscInstance
from ..mssc import Ordering


class OrderingSolverMeta(ABCMeta, type(LoggingConfigurable)):  # type: ignore
    pass


class OrderingSolverBase(ABC, LoggingConfigurable, metaclass=OrderingSolverMeta):
    """
    Abstract base class for ordering solvers.

    A solver turns an :class:`~radial_restore.mssc.MsscInstance` into an
    :class:`~radial_restore.mssc.Ordering` of all its vertices. Solvers are
    registered under the ``radial_restore.ordering_solvers`` entry-point group
    and created through :class:`~radial_restore.solvers.OrderingSolverFactory`.
    """

    # The registered name, filled in by the factory
    solver_name: str = ""

    seed = Integer(0, config=True, help="Seed for any randomness the solver uses.")

    @abstractmethod
    def order(self, inst: MsscInstance) -> Ordering:
        """Return an ordering of every vertex of ``inst``."""
        pass

    def solve(self, inst: MsscInstance) -> Ordering:
        """Order ``inst``, logging the objective reached."""
        if inst.n == 0:
            self.log.debug("Nothing to order: the instance has no vertices")
            return Ordering.of(inst, ())
        ordering = self.order(inst)
        self.log.debug(
            "%s ordered %i vertices: objective %.12g (normalized %.12g)",
            self.solver_name or type(self).__name__,
            inst.n,
            ordering.objective,
            ordering.normalized,
        )
        return ordering

    def get_solver_info(self) -> Dict[str, Any]:
        """
        Settings that reproduce this solver's output, for the config echo.

        Subclasses that add traits should extend the returned dictionary.
        """
        return dict(name=self.solver_name, seed=self.seed)
