"""The ordering solvers shipped with radial_restore"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
from typing import Any
from typing import Dict

from traitlets import Bool
from traitlets import CaselessStrEnum
from traitlets import Integer
from traitlets import TraitError
from traitlets import Unicode
from traitlets import validate

from ..errors import NoSuchKernel
from ..kernelspec import KERNEL_KINDS
from ..kernelspec import KernelSpec
from ..lp import build_mssc_lp
from ..lp import SimplexSolver
from ..mssc import DP_LIMIT
from ..mssc import exact_order_dp
from ..mssc import greedy_order
from ..mssc import MsscInstance
from ..mssc import Ordering
from ..mssc import pad_to_uniform
from ..mssc import sample_alpha_points
from ..mssc import TIE_RULES
from .solver_base import OrderingSolverBase


class GreedySolver(OrderingSolverBase):
    """Largest uncovered weight first."""

    tie_rule = CaselessStrEnum(
        TIE_RULES,
        default_value="lexicographic",
        config=True,
        help="How ties between equal gains are broken: lexicographic or random.",
    )

    def order(self, inst: MsscInstance) -> Ordering:
        return greedy_order(inst, tie_rule=self.tie_rule, seed=self.seed)

    def get_solver_info(self) -> Dict[str, Any]:
        info = super().get_solver_info()
        info["tie_rule"] = self.tie_rule
        return info


class ExactSolver(OrderingSolverBase):
    """Subset dynamic programming; refuses instances with a large core."""

    limit = Integer(DP_LIMIT, config=True, help="Largest core the exact solver accepts.")

    def order(self, inst: MsscInstance) -> Ordering:
        return exact_order_dp(inst, limit=self.limit)

    def get_solver_info(self) -> Dict[str, Any]:
        info = super().get_solver_info()
        info["limit"] = self.limit
        return info


class AlphaPointSolver(OrderingSolverBase):
    """Pad to uniformity, solve the LP relaxation, then round by α-points.

    The best of ``samples`` roundings is returned; sample ``i`` draws from the
    sub-seed ``(seed, i)``.
    """

    samples = Integer(1, config=True, help="Number of alpha-point samples drawn.")
    kernel_kind = Unicode(
        "",
        config=True,
        help="""Smoothing kernel: power-law, msvc or harmonic.
        Empty selects the kernel matched to the instance's uniformity.""",
    )
    kernel_c = Integer(
        0,
        config=True,
        help="Uniformity to pad to. Zero uses the largest hyperedge size.",
    )
    horizon = Integer(0, config=True, help="LP time horizon. Zero uses one slot per vertex.")
    strict = Bool(
        False,
        config=True,
        help="Fail instead of placing vertices whose smoothed mass never reaches the threshold.",
    )

    @validate("kernel_kind")
    def _valid_kernel_kind(self, proposal):
        value = proposal["value"].lower()
        if value and value not in KERNEL_KINDS:
            raise NoSuchKernel(proposal["value"])
        return value

    @validate("samples")
    def _valid_samples(self, proposal):
        if proposal["value"] < 1:
            raise TraitError("samples must be at least 1, got %r" % proposal["value"])
        return proposal["value"]

    def kernel_for(self, inst: MsscInstance) -> KernelSpec:
        c = self.kernel_c or inst.c
        return KernelSpec.for_uniformity(c, kind=self.kernel_kind or None)

    def order(self, inst: MsscInstance) -> Ordering:
        if inst.m == 0:
            return Ordering.of(inst, inst.vertices)
        c = self.kernel_c or inst.c
        padded = pad_to_uniform(inst, c)
        if padded is not inst:
            self.log.debug(
                "Padded to %i-uniform with %i dummy vertices", c, len(padded.dummies)
            )
        model = build_mssc_lp(padded, self.horizon or None)
        lp = SimplexSolver(parent=self).solve(model)
        self.log.debug("LP relaxation: objective %.12g in %i pivots", lp.objective, lp.iterations)
        drawn = sample_alpha_points(
            padded,
            lp.x,
            self.kernel_for(inst),
            seed=self.seed,
            samples=self.samples,
            strict=self.strict,
        )
        self.log.debug(
            "alpha-point samples: mean %.12g, best %.12g over %i slots",
            float(drawn.objectives.mean()),
            float(drawn.objectives.min()),
            drawn.horizon,
        )
        return drawn.best

    def get_solver_info(self) -> Dict[str, Any]:
        info = super().get_solver_info()
        info.update(
            samples=self.samples,
            kernel_kind=self.kernel_kind,
            kernel_c=self.kernel_c,
            horizon=self.horizon,
            strict=self.strict,
        )
        return info
