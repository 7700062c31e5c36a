"""Branch-exchange local search over spanning trees"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import math
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Dict
from typing import Iterable
from typing import List
from typing import Mapping
from typing import Optional
from typing import Tuple
from typing import Union

from traitlets import Bool
from traitlets import CaselessStrEnum
from traitlets import Integer
from traitlets.config import LoggingConfigurable

from .mssc import greedy_order
from .mssc import instance_from_coverage
from .mssc import MsscInstance
from .mssc import Ordering
from .netgraph import build_tree_config
from .netgraph import compute_coverage
from .netgraph import CoverageMap
from .netgraph import energy_loss
from .netgraph import evaluate_metrics
from .netgraph import Network
from .netgraph import TreeConfig
from .netgraph import UNCOVERED_MODES
from .netgraph import update_coverage_after_exchange
from .utils import natural_sorted
from .utils import sub_rng
from .utils import write_csv

OBJECTIVES = ("composite", "rtime", "saidi", "energy")

TRACE_COLUMNS = ["step", "edge_out", "switch_in", "r_time", "saidi", "energy", "product", "value"]


def composite_objective(
    net: Network,
    tree: TreeConfig,
    ordering: Any,
    coverage: Optional[CoverageMap] = None,
    uncovered_mode: str = "exclude",
) -> float:
    """SAIDI times R-Time times Energy."""
    return evaluate_metrics(net, tree, ordering, uncovered_mode, coverage).product


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def greedy_product_order(
    cov: CoverageMap,
    p_weights: Mapping[str, float],
    saidi_weights: Mapping[str, float],
    cross_term: bool = True,
) -> Ordering:
    """Order switches by the marginal gain in (covered SAIDI weight) x (covered R weight).

    With A and B the weights covered so far, a switch adding dA and dB scores
    dA B + dB A + dA dB, the exact increase of A B. ``cross_term=False`` drops
    the last term. Ties go to the naturally smallest switch id. The returned
    ordering belongs to the instance weighted by ``p_weights``.
    """
    inst = instance_from_coverage(cov, p_weights, log_dropped=False)
    if inst.n == 0:
        return Ordering.of(inst, ())
    for name, weights in (("p", p_weights), ("saidi", saidi_weights)):
        if any(weights[e] < 0 for e in cov.tree_edges):
            raise ValueError("%s weights must be nonnegative" % name)

    switches = cov.switches
    pos = {s: i for i, s in enumerate(switches)}
    edges = [e for e in cov.tree_edges if cov.edge_switches[e]]
    d_a = [0.0] * len(switches)
    d_b = [0.0] * len(switches)
    for e in edges:
        for s in cov.edge_switches[e]:
            d_a[pos[s]] += saidi_weights[e]
            d_b[pos[s]] += p_weights[e]

    covered = set()
    placed = [False] * len(switches)
    a = b = 0.0
    sequence = []
    for _ in switches:
        best, best_score = -1, -math.inf
        for i in range(len(switches)):
            if placed[i]:
                continue
            score = d_a[i] * b + d_b[i] * a
            if cross_term:
                score += d_a[i] * d_b[i]
            if best < 0 or (score > best_score and not _close(score, best_score)):
                best, best_score = i, score
        placed[best] = True
        s = switches[best]
        sequence.append(s)
        a += d_a[best]
        b += d_b[best]
        for e in cov.switch_edges[s]:
            if e in covered:
                continue
            covered.add(e)
            for other in cov.edge_switches[e]:
                d_a[pos[other]] -= saidi_weights[e]
                d_b[pos[other]] -= p_weights[e]
    return Ordering.of(inst, sequence)


@dataclass(frozen=True)
class TraceStep:
    step: int
    edge_out: str
    switch_in: str
    r_time: float
    saidi: float
    energy: float
    product: float
    value: float

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in TRACE_COLUMNS}


@dataclass
class SearchState:
    tree: TreeConfig
    coverage: CoverageMap
    ordering: Ordering
    value: float
    pool: List[Tuple[str, str]] = field(default_factory=list)
    trace: List[TraceStep] = field(default_factory=list)


@dataclass(frozen=True)
class SearchResult:
    tree: TreeConfig
    ordering: Ordering
    trace: Tuple[TraceStep, ...]
    initial_value: float
    value: float
    evaluations: int
    converged: bool

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            tree_edges=natural_sorted(self.tree.edges),
            ordering=list(self.ordering.sequence),
            initial_value=self.initial_value,
            value=self.value,
            evaluations=self.evaluations,
            converged=self.converged,
            accepted=len(self.trace),
        )


class BranchExchangeSearch(LoggingConfigurable):
    """Swap a tree edge for a switch that covers it while the objective drops.

    Pairs are drawn without replacement from T x S; a pair whose switch does
    not cover its edge is skipped when drawn. Every accepted exchange refills
    the pool from the new tree.
    """

    objective = CaselessStrEnum(
        OBJECTIVES,
        default_value="composite",
        config=True,
        help="Objective to minimize: composite, rtime, saidi or energy.",
    )
    seed = Integer(0, config=True, help="Seed for drawing exchange candidates.")
    max_steps = Integer(100, config=True, help="Stop after this many accepted exchanges.")
    uncovered_mode = CaselessStrEnum(
        UNCOVERED_MODES,
        default_value="exclude",
        config=True,
        help="How tree edges that no switch covers enter the metrics.",
    )
    cross_term = Bool(
        True, config=True, help="Include the dA*dB term in the product-greedy score."
    )
    cross_check = Bool(
        False,
        config=True,
        help="Compare incremental coverage against a full recomputation while searching.",
    )
    check_every = Integer(50, config=True, help="Evaluations between coverage cross-checks.")

    def _weights(self, net: Network, tree: TreeConfig) -> Tuple[Dict[str, float], Dict[str, float]]:
        p = {e: net.edges[e].weight for e in tree.edges}
        return p, {e: p[e] * tree.flow[e] for e in tree.edges}

    def order(self, net: Network, tree: TreeConfig, cov: CoverageMap) -> Ordering:
        """The inner ordering used for ``objective``."""
        p, saidi = self._weights(net, tree)
        if self.objective in ("rtime", "saidi"):
            inst = instance_from_coverage(cov, p if self.objective == "rtime" else saidi, False)
            if inst.n == 0:
                return Ordering.of(inst, ())
            return greedy_order(inst)
        return greedy_product_order(cov, p, saidi, cross_term=self.cross_term)

    def evaluate(
        self, net: Network, tree: TreeConfig, cov: CoverageMap, final: bool = False
    ) -> Tuple[Optional[Ordering], float]:
        if self.objective == "energy" and not final:
            return None, energy_loss(net, tree)
        ordering = self.order(net, tree, cov)
        metrics = evaluate_metrics(net, tree, ordering, self.uncovered_mode, cov)
        value = {
            "composite": metrics.product,
            "rtime": metrics.r_time,
            "saidi": metrics.saidi,
            "energy": metrics.energy,
        }[self.objective]
        return ordering, value

    def _pool(self, tree: TreeConfig, cov: CoverageMap) -> List[Tuple[str, str]]:
        return [(e, s) for e in cov.tree_edges for s in cov.switches]

    def run(self, net: Network, tree0: Union[TreeConfig, Iterable[str]]) -> SearchResult:
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        tree = tree0 if isinstance(tree0, TreeConfig) else build_tree_config(net, tree0)
        cov = compute_coverage(net, tree)
        ordering, value = self.evaluate(net, tree, cov)
        state = SearchState(tree, cov, ordering, value, self._pool(tree, cov))  # type: ignore
        initial = value
        rng = sub_rng(self.seed, 0)
        evaluations = 0
        while state.pool and len(state.trace) < self.max_steps:
            k = int(rng.integers(len(state.pool)))
            e, s = state.pool[k]
            state.pool[k] = state.pool[-1]
            state.pool.pop()
            if not state.coverage.covers(s, e):
                continue
            tree, cov = update_coverage_after_exchange(net, state.tree, state.coverage, e, s)
            evaluations += 1
            if self.cross_check and evaluations % self.check_every == 0:
                self._check(net, tree, cov)
            ordering, value = self.evaluate(net, tree, cov)
            if value < state.value - 1e-12 * abs(state.value):
                state.tree, state.coverage, state.value = tree, cov, value
                state.ordering = ordering  # type: ignore
                state.pool = self._pool(tree, cov)
                state.trace.append(self._step(net, state, e, s))
                self.log.debug(
                    "Exchange %i: %s out, %s in, %s = %.12g",
                    len(state.trace),
                    e,
                    s,
                    self.objective,
                    value,
                )
        converged = not state.pool
        final_order, _ = self.evaluate(net, state.tree, state.coverage, final=True)
        self.log.info(
            "Branch exchange stopped after %i exchanges and %i evaluations (%s)",
            len(state.trace),
            evaluations,
            "local optimum" if converged else "step limit",
        )
        return SearchResult(
            tree=state.tree,
            ordering=final_order,  # type: ignore
            trace=tuple(state.trace),
            initial_value=initial,
            value=state.value,
            evaluations=evaluations,
            converged=converged,
        )

    def _step(self, net: Network, state: SearchState, e: str, s: str) -> TraceStep:
        ordering = state.ordering
        if ordering is None:
            ordering = self.order(net, state.tree, state.coverage)
        metrics = evaluate_metrics(net, state.tree, ordering, self.uncovered_mode, state.coverage)
        return TraceStep(
            step=len(state.trace) + 1,
            edge_out=e,
            switch_in=s,
            r_time=metrics.r_time,
            saidi=metrics.saidi,
            energy=metrics.energy,
            product=metrics.product,
            value=state.value,
        )

    def _check(self, net: Network, tree: TreeConfig, cov: CoverageMap) -> None:
        full = compute_coverage(net, tree)
        if dict(full.edge_switches) != dict(cov.edge_switches) or dict(full.switch_edges) != dict(
            cov.switch_edges
        ):
            raise AssertionError("Incremental coverage diverged from a full recomputation")
        self.log.debug("Incremental coverage matches a full recomputation")


def branch_exchange(
    net: Network,
    tree0: Union[TreeConfig, Iterable[str]],
    objective: str = "composite",
    seed: int = 0,
    max_steps: int = 100,
    **kwargs: Any,
) -> Tuple[TreeConfig, Ordering, Tuple[TraceStep, ...]]:
    """Run :class:`BranchExchangeSearch` and return (tree, ordering, trace)."""
    search = BranchExchangeSearch(objective=objective, seed=seed, max_steps=max_steps, **kwargs)
    result = search.run(net, tree0)
    return result.tree, result.ordering, result.trace


def replay_trace(
    net: Network, tree0: Union[TreeConfig, Iterable[str]], trace: Iterable[TraceStep]
) -> TreeConfig:
    """Apply the exchanges of ``trace`` to ``tree0`` in order."""
    tree = tree0 if isinstance(tree0, TreeConfig) else build_tree_config(net, tree0)
    cov = compute_coverage(net, tree)
    for step in trace:
        tree, cov = update_coverage_after_exchange(net, tree, cov, step.edge_out, step.switch_in)
    return tree


def write_trace_csv(path: str, trace: Iterable[TraceStep], comment: Optional[str] = None) -> None:
    write_csv(path, (step.to_dict() for step in trace), TRACE_COLUMNS, comment)


def instance_for(net: Network, tree: TreeConfig, metric: str = "rtime") -> MsscInstance:
    """The MSSC instance whose objective is the numerator of ``metric`` on ``tree``."""
    cov = compute_coverage(net, tree)
    p = {e: net.edges[e].weight for e in tree.edges}
    if metric == "saidi":
        p = {e: p[e] * tree.flow[e] for e in tree.edges}
    elif metric != "rtime":
        raise ValueError("metric must be rtime or saidi")
    return instance_from_coverage(cov, p)
