"""Ordering solver discovery"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
from os import getenv
from typing import Any
from typing import Dict
from typing import List
from typing import Optional

from entrypoints import EntryPoint
from entrypoints import get_group_all
from entrypoints import get_single
from entrypoints import NoSuchEntryPoint
from traitlets.config import default
from traitlets.config import SingletonConfigurable
from traitlets.config import Unicode

from ..errors import NoSuchSolver
from .solver_base import OrderingSolverBase

# solvers defined in this package, by entry-point name
BUILTIN_SOLVERS = {
    "greedy": "GreedySolver",
    "alpha": "AlphaPointSolver",
    "exact": "ExactSolver",
}


class OrderingSolverFactory(SingletonConfigurable):
    """
    :class:`OrderingSolverFactory` creates ordering solver instances by name.

    Solvers are found in the ``radial_restore.ordering_solvers`` entry-point
    group. Its ``default_solver_name`` is used when no name is given and can
    be set through the ``RADIAL_RESTORE_DEFAULT_SOLVER`` environment variable.
    """

    GROUP_NAME = "radial_restore.ordering_solvers"
    solvers: Dict[str, EntryPoint] = {}

    default_solver_name_env = "RADIAL_RESTORE_DEFAULT_SOLVER"
    default_solver_name = Unicode(
        config=True,
        help="""The ordering solver used when none is named.""",
    )

    @default("default_solver_name")
    def default_solver_name_default(self):
        return getenv(self.default_solver_name_env, "greedy")

    def __init__(self, **kwargs: Any) -> None:
        super().__init__(**kwargs)

        for ep in OrderingSolverFactory._get_all_solvers():
            self.solvers[ep.name] = ep
        # a source checkout that was never installed has no entry-point metadata
        for name, obj in BUILTIN_SOLVERS.items():
            if name not in self.solvers:
                self.log.debug("Ordering solver %r is not registered; using the builtin", name)
                self.solvers[name] = EntryPoint(name, "radial_restore.solvers.builtin", obj)

    def is_solver_available(self, name: str) -> bool:
        """Whether ``name`` is registered or can be loaded from its entry point."""
        if name not in self.solvers:
            try:
                self.solvers[name] = self._get_solver(name)
            except NoSuchEntryPoint:
                return False
        return True

    def create_solver_instance(
        self, name: Optional[str] = None, parent: Any = None, **config: Any
    ) -> OrderingSolverBase:
        """
        Instantiate the solver registered as ``name``, or the default solver.

        Entries of ``config`` that are not configurable traits of the solver
        class are ignored, so one set of run settings serves every solver.

        Raises :class:`~radial_restore.errors.NoSuchSolver` when nothing is
        registered under that name.
        """
        name = (name or self.default_solver_name).lower()
        if not self.is_solver_available(name):
            raise NoSuchSolver(name)
        self.log.debug("Instantiating ordering solver %r", name)
        solver_class = self.solvers[name].load()
        known = solver_class.class_trait_names(config=True)
        settings = {k: v for k, v in config.items() if k in known}
        solver: OrderingSolverBase = solver_class(parent=parent, **settings)
        solver.solver_name = name
        return solver

    def get_solver_entries(self) -> Dict[str, str]:
        """
        Returns a dictionary of solver entries.

        The key is the solver name for its entry point.  The value is the colon-separated
        string of the entry point's module name and object name.
        """
        entries = {}
        for name, ep in self.solvers.items():
            entries[name] = f"{ep.module_name}:{ep.object_name}"
        return entries

    @staticmethod
    def _get_all_solvers() -> List[EntryPoint]:
        """Wrapper around entrypoints.get_group_all() - primarily to facilitate testing."""
        return get_group_all(OrderingSolverFactory.GROUP_NAME)

    def _get_solver(self, name: str) -> EntryPoint:
        """Wrapper around entrypoints.get_single() - primarily to facilitate testing."""
        return get_single(OrderingSolverFactory.GROUP_NAME, name)
