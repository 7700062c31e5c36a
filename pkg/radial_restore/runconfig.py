"""Run configuration shared by the command-line stages"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import os
from os import getenv
from typing import Any
from typing import Dict

from traitlets import Bool
from traitlets import CaselessStrEnum
from traitlets import Float
from traitlets import Integer
from traitlets import TraitError
from traitlets import Unicode
from traitlets import validate
from traitlets.config import LoggingConfigurable

from .localsearch import OBJECTIVES
from .netgraph import UNCOVERED_MODES

ENV_PREFIX = "RADIAL_RESTORE_"

METRICS = ("rtime", "saidi")


def env_name(trait_name: str) -> str:
    return ENV_PREFIX + trait_name.upper()


class RunConfig(LoggingConfigurable):
    """Every parameter a run depends on.

    Values come from the command line, a ``radial_restore_config`` file, or an
    environment variable named ``RADIAL_RESTORE_<TRAIT>``, in that order of
    precedence, before the defaults below. :meth:`to_dict` is the config echo
    embedded in every artifact.
    """

    # inputs and outputs
    network = Unicode("", config=True, help="Network document written by an earlier stage.")
    buses = Unicode("", config=True, help="Bus table (CSV) to ingest.")
    lines = Unicode("", config=True, help="Line table (CSV) to ingest.")
    hypergraph = Unicode("", config=True, help="Hypergraph file to order instead of a network.")
    solution = Unicode(
        "", config=True, help="Solution whose ordering report uses; empty runs the solver."
    )
    output_dir = Unicode(".", config=True, help="Directory the artifacts are written to.")

    # preprocessing
    threshold_kw = Float(10.0, config=True, help="Leaves below this demand (kW) are contracted.")
    pre_update_weight = Bool(
        False,
        config=True,
        help="Scale a contracted leaf's weight by its parent's demand before the merge.",
    )
    max_length_m = Float(
        1000.0, config=True, help="Candidate switches must be shorter than this (m)."
    )
    max_switches = Integer(20, config=True, help="Most switches add-switches may place.")
    coverage_target = Float(
        0.9, config=True, help="Stop adding switches once this share of exposure is covered."
    )
    candidate_cap = Integer(
        0, config=True, help="Keep only the shortest candidates; zero keeps them all."
    )

    # ordering
    solver = Unicode(
        "", config=True, help="Ordering solver name; empty uses the factory's default solver."
    )
    metric = CaselessStrEnum(
        METRICS,
        default_value="rtime",
        config=True,
        help="Weights of the ordering instance: failure weight (rtime) or exposure (saidi).",
    )
    kernel_c = Integer(
        0, config=True, help="Uniformity for alpha-point rounding; zero is automatic."
    )
    kernel_kind = Unicode("", config=True, help="Rounding kernel; empty is automatic.")
    samples = Integer(1, config=True, help="Alpha-point samples drawn.")
    seed = Integer(0, config=True, help="The global seed every sub-seed derives from.")
    dump_lp = Bool(False, config=True, help="Also write the LP relaxation as model.lp.")

    # local search
    max_steps = Integer(100, config=True, help="Most exchanges local search accepts.")
    objective = CaselessStrEnum(
        OBJECTIVES, default_value="composite", config=True, help="Local search objective."
    )
    cross_term = Bool(
        True, config=True, help="Include the dA*dB term in the product-greedy ordering."
    )
    uncovered_mode = CaselessStrEnum(
        UNCOVERED_MODES,
        default_value="exclude",
        config=True,
        help="Tree edges no switch covers: exclude them, or restore them last (penalty).",
    )

    # generators
    wheel_size = Integer(7, config=True, help="Vertices of the generated wheel, hub included.")
    gap_c = Integer(3, config=True, help="Uniformity of the integrality-gap family.")
    gap_n = Integer(9, config=True, help="Scale N of the integrality-gap family.")
    gap_k = Integer(2, config=True, help="Block count of the integrality-gap family.")
    gap_epsilon = Float(0.05, config=True, help="Exponent slack of the integrality-gap family.")

    def __init__(self, **kwargs: Any) -> None:
        super().__init__(**kwargs)
        for name, trait in self.traits(config=True).items():
            raw = getenv(env_name(name))
            if raw is None or name in kwargs or self._configured(name):
                continue
            try:
                self.set_trait(name, trait.from_string(raw))
            except (TraitError, ValueError) as e:
                raise TraitError("Bad value %r in %s: %s" % (raw, env_name(name), e))
            self.log.debug("%s = %r from %s", name, getattr(self, name), env_name(name))

    def _configured(self, name: str) -> bool:
        for cls in type(self).mro():
            if cls.__name__ in self.config and name in self.config[cls.__name__]:
                return True
        return False

    @validate("threshold_kw", "max_length_m")
    def _nonnegative(self, proposal):
        if not proposal["value"] >= 0:
            raise TraitError("%s must be nonnegative" % proposal["trait"].name)
        return proposal["value"]

    @validate("coverage_target")
    def _fraction(self, proposal):
        if not 0 <= proposal["value"] <= 1:
            raise TraitError("coverage_target must lie in [0, 1]")
        return proposal["value"]

    @validate("max_switches", "samples", "max_steps")
    def _positive(self, proposal):
        if proposal["value"] < 1:
            raise TraitError("%s must be at least 1" % proposal["trait"].name)
        return proposal["value"]

    def output_path(self, filename: str) -> str:
        """``filename`` under :attr:`output_dir`, creating the directory."""
        os.makedirs(self.output_dir or ".", exist_ok=True)
        return os.path.join(self.output_dir or ".", filename)

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in sorted(self.trait_names(config=True))}
