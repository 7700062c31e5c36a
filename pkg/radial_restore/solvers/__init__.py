from .builtin import AlphaPointSolver  # noqa
from .builtin import ExactSolver  # noqa
from .builtin import GreedySolver  # noqa
from .factory import OrderingSolverFactory  # noqa
from .solver_base import OrderingSolverBase  # noqa
