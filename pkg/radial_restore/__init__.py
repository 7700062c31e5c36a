"""Minimum reconnection time planning for radial distribution networks"""
from ._version import __version__  # noqa
from ._version import network_format_version  # noqa
from ._version import network_format_version_info  # noqa
from ._version import version_info  # noqa

try:
    from .errors import RestoreError  # noqa
    from .kernelspec import KernelSpec  # noqa
    from .localsearch import branch_exchange  # noqa
    from .localsearch import BranchExchangeSearch  # noqa
    from .lp import build_mssc_lp  # noqa
    from .lp import solve_lp  # noqa
    from .mssc import alpha_point_round  # noqa
    from .mssc import exact_order_dp  # noqa
    from .mssc import greedy_order  # noqa
    from .mssc import instance_from_coverage  # noqa
    from .mssc import MsscInstance  # noqa
    from .mssc import Ordering  # noqa
    from .mssc import pad_to_uniform  # noqa
    from .netfile import read_network_file  # noqa
    from .netfile import write_network_file  # noqa
    from .netgraph import build_tree_config  # noqa
    from .netgraph import compute_coverage  # noqa
    from .netgraph import evaluate_metrics  # noqa
    from .netgraph import Network  # noqa
    from .netgraph import TreeConfig  # noqa
    from .netgraph import update_coverage_after_exchange  # noqa
    from .prep import candidate_switches  # noqa
    from .prep import contract_tree  # noqa
    from .prep import greedy_add_switches  # noqa
    from .prep import ingest_csv  # noqa
    from .solvers import OrderingSolverFactory  # noqa
except ModuleNotFoundError:
    import warnings

    warnings.warn("Could not import submodules")
