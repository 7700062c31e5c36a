"""Radial network model: spanning trees, switch coverage and reliability metrics.

A :class:`Network` is a connected simple graph with a designated root (the
substation). A spanning tree of it is the active configuration; every edge
outside the tree is a normally-open *switch*. A switch ``s`` covers a tree
edge ``e`` when closing ``s`` after ``e`` fails reconnects everything, that is
when ``e`` lies on the tree path between the endpoints of ``s``.
"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import math
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from functools import cached_property
from typing import Any
from typing import Dict
from typing import FrozenSet
from typing import Iterable
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence
from typing import Tuple

import networkx as nx
from traitlets.log import get_logger

from .errors import DisconnectedInput
from .errors import DuplicateEdge
from .errors import InfeasibleExchange
from .errors import InvalidNetwork
from .errors import MissingRoot
from .errors import NotAPermutation
from .errors import NotATree
from .errors import UnknownEdgeId
from .utils import natural_key
from .utils import natural_sorted

VOLTAGE_CLASSES = ("LV", "MV")
UNCOVERED_MODES = ("exclude", "penalty")


def _finite_nonneg(value: float) -> bool:
    return math.isfinite(value) and value >= 0


@dataclass(frozen=True)
class Vertex:
    id: str
    demand: float = 0.0
    x: Optional[float] = None
    y: Optional[float] = None
    voltage_class: str = "LV"

    @property
    def has_coordinates(self) -> bool:
        return self.x is not None and self.y is not None

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            id=self.id, demand=self.demand, x=self.x, y=self.y, voltage_class=self.voltage_class
        )


@dataclass(frozen=True)
class Edge:
    """An edge with failure weight ``weight`` (p) and resistance (r)."""

    id: str
    u: str
    v: str
    weight: float = 1.0
    resistance: float = 0.0

    @property
    def endpoints(self) -> FrozenSet[str]:
        return frozenset((self.u, self.v))

    def other(self, vertex: str) -> str:
        return self.v if vertex == self.u else self.u

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            id=self.id, u=self.u, v=self.v, weight=self.weight, resistance=self.resistance
        )


@dataclass(frozen=True)
class Network:
    """A connected simple graph with demands, failure weights and a root.

    ``default_tree`` optionally records the tree the network was read with.
    Instances are validated on construction and never change afterwards;
    :meth:`with_edges` and friends return new networks.
    """

    vertices: Mapping[str, Vertex]
    edges: Mapping[str, Edge]
    root: str
    default_tree: Optional[FrozenSet[str]] = None
    _incident: Dict[str, Tuple[str, ...]] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )
    _pairs: Dict[FrozenSet[str], str] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        incident: Dict[str, List[str]] = {v: [] for v in self.vertices}
        pairs: Dict[FrozenSet[str], str] = {}
        for eid, edge in self.edges.items():
            if eid != edge.id:
                raise InvalidNetwork("Edge keyed %r carries id %r" % (eid, edge.id))
            for end in (edge.u, edge.v):
                if end not in incident:
                    raise InvalidNetwork("Edge %r references unknown vertex %r" % (eid, end))
            if edge.u == edge.v:
                raise InvalidNetwork("Edge %r is a self-loop at %r" % (eid, edge.u))
            if edge.endpoints in pairs:
                raise DuplicateEdge(
                    "Edges %r and %r join the same vertices" % (pairs[edge.endpoints], eid),
                    edge_id=eid,
                )
            pairs[edge.endpoints] = eid
            incident[edge.u].append(eid)
            incident[edge.v].append(eid)
        object.__setattr__(self, "_incident", {v: tuple(es) for v, es in incident.items()})
        object.__setattr__(self, "_pairs", pairs)
        self.validate()

    def validate(self) -> None:
        """Raise on the first violated invariant."""
        if self.root not in self.vertices:
            raise MissingRoot("Root %r is not a vertex of the network" % self.root)
        for vid, vertex in self.vertices.items():
            if vid != vertex.id:
                raise InvalidNetwork("Vertex keyed %r carries id %r" % (vid, vertex.id))
            if not _finite_nonneg(vertex.demand):
                raise InvalidNetwork("Vertex %r has invalid demand %r" % (vid, vertex.demand))
            if vertex.voltage_class not in VOLTAGE_CLASSES:
                raise InvalidNetwork(
                    "Vertex %r has unknown voltage class %r" % (vid, vertex.voltage_class)
                )
        for eid, edge in self.edges.items():
            if not _finite_nonneg(edge.weight):
                raise InvalidNetwork("Edge %r has invalid failure weight %r" % (eid, edge.weight))
            if not _finite_nonneg(edge.resistance):
                raise InvalidNetwork("Edge %r has invalid resistance %r" % (eid, edge.resistance))
        if self.vertices and not nx.is_connected(self.to_networkx()):
            count = nx.number_connected_components(self.to_networkx())
            raise DisconnectedInput(
                "Network falls apart into %i components" % count, components=count
            )
        if self.default_tree is not None:
            for eid in self.default_tree:
                if eid not in self.edges:
                    raise UnknownEdgeId(eid)

    # --- lookups -----------------------------------------------------------------------------

    def incident(self, vertex: str) -> Tuple[str, ...]:
        return self._incident[vertex]

    def edge_between(self, u: str, v: str) -> Optional[str]:
        return self._pairs.get(frozenset((u, v)))

    def switch_ids(self, tree_edges: Iterable[str]) -> List[str]:
        """Edges outside ``tree_edges``, naturally sorted."""
        active = set(tree_edges)
        return natural_sorted(e for e in self.edges if e not in active)

    def total_demand(self, include_root: bool = False) -> float:
        return math.fsum(
            v.demand for vid, v in self.vertices.items() if include_root or vid != self.root
        )

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from((e.u, e.v, {"id": e.id}) for e in self.edges.values())
        return g

    # --- derived networks --------------------------------------------------------------------

    def with_edges(self, new_edges: Iterable[Edge]) -> "Network":
        edges = dict(self.edges)
        for edge in new_edges:
            if edge.id in edges:
                raise DuplicateEdge("Edge id %r already exists" % edge.id, edge_id=edge.id)
            edges[edge.id] = edge
        return replace(self, edges=edges)

    def without_edges(self, edge_ids: Iterable[str]) -> "Network":
        drop = set(edge_ids)
        edges = {eid: e for eid, e in self.edges.items() if eid not in drop}
        tree = self.default_tree - drop if self.default_tree is not None else None
        return replace(self, edges=edges, default_tree=tree)

    def with_default_tree(self, tree_edges: Iterable[str]) -> "Network":
        return replace(self, default_tree=frozenset(tree_edges))

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            root=self.root,
            vertices=[v.to_dict() for v in self.vertices.values()],
            edges=[e.to_dict() for e in self.edges.values()],
        )

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], default_tree=None) -> "Network":
        vertices = {}
        for item in d["vertices"]:
            vertices[str(item["id"])] = Vertex(
                id=str(item["id"]),
                demand=float(item.get("demand", 0.0)),
                x=None if item.get("x") is None else float(item["x"]),
                y=None if item.get("y") is None else float(item["y"]),
                voltage_class=item.get("voltage_class", "LV"),
            )
        edges = {}
        for item in d["edges"]:
            edges[str(item["id"])] = Edge(
                id=str(item["id"]),
                u=str(item["u"]),
                v=str(item["v"]),
                weight=float(item.get("weight", 1.0)),
                resistance=float(item.get("resistance", 0.0)),
            )
        tree = frozenset(default_tree) if default_tree is not None else None
        return cls(vertices=vertices, edges=edges, root=str(d["root"]), default_tree=tree)


@dataclass(frozen=True)
class TreeConfig:
    """A spanning tree oriented toward the root.

    ``parent`` and ``parent_edge`` map every vertex to its upstream neighbour
    and the connecting edge (``None`` at the root); ``lower`` maps each tree
    edge to its downstream endpoint and ``flow`` to f(e), the demand below it.
    """

    root: str
    edges: FrozenSet[str]
    parent: Mapping[str, Optional[str]]
    parent_edge: Mapping[str, Optional[str]]
    lower: Mapping[str, str]
    flow: Mapping[str, float]

    @cached_property
    def children(self) -> Dict[str, List[str]]:
        kids: Dict[str, List[str]] = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                kids[p].append(v)
        for v in kids:
            kids[v].sort(key=natural_key)
        return kids

    @cached_property
    def order(self) -> Tuple[str, ...]:
        """Vertices top-down, parents before children."""
        out = [self.root]
        kids = self.children
        i = 0
        while i < len(out):
            out.extend(kids[out[i]])
            i += 1
        return tuple(out)

    def path(self, u: str, v: str) -> List[str]:
        """Tree edge ids on the path from ``u`` to ``v``."""
        seen: Dict[str, int] = {}
        up: List[str] = []
        x: Optional[str] = u
        while x is not None:
            seen[x] = len(up)
            up.append(x)
            x = self.parent[x]
        down: List[str] = []
        y = v
        while y not in seen:
            down.append(self.parent_edge[y])  # type: ignore
            y = self.parent[y]  # type: ignore
        rising = [self.parent_edge[a] for a in up[: seen[y]]]
        return rising + down[::-1]  # type: ignore

    def is_below(self, vertex: str, edge_id: str) -> bool:
        """Whether ``vertex`` is in D(edge_id)."""
        top = self.lower[edge_id]
        x: Optional[str] = vertex
        while x is not None:
            if x == top:
                return True
            x = self.parent[x]
        return False

    def downstream(self, edge_id: str) -> List[str]:
        """D(edge_id), top-down."""
        out = [self.lower[edge_id]]
        i = 0
        while i < len(out):
            out.extend(self.children[out[i]])
            i += 1
        return out


def build_tree_config(net: Network, tree_edges: Iterable[str]) -> TreeConfig:
    """Orient ``tree_edges`` toward the root and compute f(e) bottom-up."""
    tree = frozenset(tree_edges)
    for eid in tree:
        if eid not in net.edges:
            raise UnknownEdgeId(eid)
    if len(tree) != len(net.vertices) - 1:
        raise NotATree(
            "A spanning tree of %i vertices has %i edges, got %i"
            % (len(net.vertices), len(net.vertices) - 1, len(tree))
        )

    parent: Dict[str, Optional[str]] = {net.root: None}
    parent_edge: Dict[str, Optional[str]] = {net.root: None}
    lower: Dict[str, str] = {}
    order = [net.root]
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for eid in net.incident(v):
            if eid not in tree or eid == parent_edge[v]:
                continue
            w = net.edges[eid].other(v)
            if w in parent:
                raise NotATree("Tree edges close a cycle through %r" % w)
            parent[w] = v
            parent_edge[w] = eid
            lower[eid] = w
            order.append(w)
    if len(order) != len(net.vertices):
        missing = natural_sorted(v for v in net.vertices if v not in parent)
        raise NotATree("Tree edges do not reach %s" % ", ".join(missing[:5]))

    below = {v: net.vertices[v].demand for v in order}
    flow: Dict[str, float] = {}
    for v in reversed(order[1:]):
        flow[parent_edge[v]] = below[v]  # type: ignore
        below[parent[v]] += below[v]  # type: ignore
    return TreeConfig(
        root=net.root,
        edges=tree,
        parent=parent,
        parent_edge=parent_edge,
        lower=lower,
        flow=flow,
    )


@dataclass(frozen=True)
class CoverageMap:
    """The covering relation between switches and tree edges, both ways."""

    edge_switches: Mapping[str, Tuple[str, ...]]
    switch_edges: Mapping[str, Tuple[str, ...]]

    @property
    def switches(self) -> List[str]:
        return natural_sorted(self.switch_edges)

    @property
    def tree_edges(self) -> List[str]:
        return natural_sorted(self.edge_switches)

    @property
    def uncovered(self) -> List[str]:
        return [e for e in self.tree_edges if not self.edge_switches[e]]

    @property
    def c(self) -> int:
        """Largest number of switches covering one tree edge."""
        return max((len(s) for s in self.edge_switches.values()), default=0)

    def covers(self, switch_id: str, edge_id: str) -> bool:
        return edge_id in self.switch_edges.get(switch_id, ())


def _sorted(ids: Iterable[str]) -> Tuple[str, ...]:
    return tuple(sorted(ids, key=natural_key))


def compute_coverage(net: Network, tree: TreeConfig) -> CoverageMap:
    covering: Dict[str, List[str]] = {e: [] for e in tree.edges}
    switch_edges: Dict[str, Tuple[str, ...]] = {}
    for sid in net.switch_ids(tree.edges):
        sw = net.edges[sid]
        path = tree.path(sw.u, sw.v)
        switch_edges[sid] = _sorted(path)
        for eid in path:
            covering[eid].append(sid)
    edge_switches = {e: _sorted(s) for e, s in covering.items()}
    return CoverageMap(edge_switches=edge_switches, switch_edges=switch_edges)


def _exchange_tree(net: Network, tree: TreeConfig, e: str, s_e: str) -> TreeConfig:
    """T - e + s_e, updating orientation and flows along the cycle only."""
    top = tree.lower[e]
    sw = net.edges[s_e]
    if tree.is_below(sw.u, e):
        inner, outer = sw.u, sw.v
    else:
        inner, outer = sw.v, sw.u
    moved = tree.flow[e]

    parent = dict(tree.parent)
    parent_edge = dict(tree.parent_edge)
    lower = dict(tree.lower)
    flow = dict(tree.flow)
    del lower[e]
    del flow[e]

    # the detached subtree's demand leaves the old root path and joins the new one
    z = tree.parent[top]
    while tree.parent[z] is not None:  # type: ignore
        flow[tree.parent_edge[z]] -= moved  # type: ignore
        z = tree.parent[z]  # type: ignore
    z = outer
    while tree.parent[z] is not None:
        flow[tree.parent_edge[z]] += moved  # type: ignore
        z = tree.parent[z]  # type: ignore

    chain = [inner]
    while chain[-1] != top:
        chain.append(tree.parent[chain[-1]])  # type: ignore
    parent[inner] = outer
    parent_edge[inner] = s_e
    lower[s_e] = inner
    flow[s_e] = moved
    for up, down in zip(chain, chain[1:]):
        eid = tree.parent_edge[up]
        parent[down] = up
        parent_edge[down] = eid
        lower[eid] = down  # type: ignore
        flow[eid] = moved - tree.flow[eid]  # type: ignore

    return TreeConfig(
        root=tree.root,
        edges=(tree.edges - {e}) | {s_e},
        parent=parent,
        parent_edge=parent_edge,
        lower=lower,
        flow=flow,
    )


def update_coverage_after_exchange(
    net: Network, tree: TreeConfig, cov: CoverageMap, e: str, s_e: str
) -> Tuple[TreeConfig, CoverageMap]:
    """Exchange tree edge ``e`` for switch ``s_e`` and patch the coverage.

    Only switches that covered ``e`` change: each such switch ``s`` now covers
    the symmetric difference of its old cycle and the cycle of ``s_e``, with
    ``s_e`` in place of ``e``. The pairs touched are exactly those (f, s) with
    f on the cycle of ``s_e`` and ``s`` covering ``e``; everything else is
    carried over unchanged.
    """
    if e not in tree.edges or not cov.covers(s_e, e):
        raise InfeasibleExchange(e, s_e)

    new_tree = _exchange_tree(net, tree, e, s_e)

    cycle = set(cov.switch_edges[s_e])
    affected = set(cov.edge_switches[e]) - {s_e}

    switch_edges = dict(cov.switch_edges)
    del switch_edges[s_e]
    switch_edges[e] = _sorted((cycle - {e}) | {s_e})
    for sid in affected:
        switch_edges[sid] = _sorted((set(switch_edges[sid]) ^ cycle) | {s_e})

    edge_switches = dict(cov.edge_switches)
    del edge_switches[e]
    for fid in cycle - {e}:
        members = set(edge_switches[fid])
        members.discard(s_e)
        members ^= affected
        members.add(e)
        edge_switches[fid] = _sorted(members)
    edge_switches[s_e] = _sorted(affected | {e})

    return new_tree, CoverageMap(edge_switches=edge_switches, switch_edges=switch_edges)


# --- metrics -----------------------------------------------------------------------------------


def _sequence(ordering: Any) -> Sequence[str]:
    return getattr(ordering, "sequence", ordering)


def cover_times(cov: CoverageMap, ordering: Any) -> Dict[str, Optional[int]]:
    """t(e) = min rank of a covering switch, ranks from 1; ``None`` if uncovered."""
    seq = list(_sequence(ordering))
    rank = {sid: i + 1 for i, sid in enumerate(seq)}
    if len(rank) != len(seq) or set(rank) != set(cov.switch_edges):
        raise NotAPermutation(
            "Ordering must list each of the %i switches exactly once" % len(cov.switch_edges)
        )
    return {
        e: min((rank[s] for s in switches), default=None)
        for e, switches in cov.edge_switches.items()
    }


def _effective_times(
    cov: CoverageMap, ordering: Any, uncovered_mode: str
) -> Dict[str, Optional[int]]:
    if uncovered_mode not in UNCOVERED_MODES:
        raise ValueError("uncovered_mode must be one of %s" % (UNCOVERED_MODES,))
    times = cover_times(cov, ordering)
    if uncovered_mode == "penalty":
        penalty = len(cov.switch_edges) + 1
        times = {e: penalty if t is None else t for e, t in times.items()}
    return times


@dataclass(frozen=True)
class MetricsReport:
    r_time: float
    saidi: float
    energy: float
    uncovered_exposure: float
    class_outage: Mapping[str, float]
    cover_times: Mapping[str, Optional[int]]
    switch_count: int
    uncovered_mode: str = "exclude"

    @property
    def product(self) -> float:
        return self.r_time * self.saidi * self.energy

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            r_time=self.r_time,
            saidi=self.saidi,
            energy=self.energy,
            product=self.product,
            uncovered_exposure=self.uncovered_exposure,
            class_outage=dict(self.class_outage),
            switch_count=self.switch_count,
            uncovered_mode=self.uncovered_mode,
        )


def energy_loss(net: Network, tree: TreeConfig) -> float:
    """Sum of r(e) f(e)^2 over the tree."""
    return math.fsum(net.edges[e].resistance * tree.flow[e] ** 2 for e in tree.edges)


def per_vertex_outage(
    net: Network,
    tree: TreeConfig,
    ordering: Any,
    uncovered_mode: str = "exclude",
    coverage: Optional[CoverageMap] = None,
) -> Dict[str, float]:
    """Expected outage of each vertex: p(e) t(e) summed over its root path."""
    cov = coverage if coverage is not None else compute_coverage(net, tree)
    times = _effective_times(cov, ordering, uncovered_mode)
    outage: Dict[str, float] = {tree.root: 0.0}
    for v in tree.order[1:]:
        eid = tree.parent_edge[v]
        t = times[eid]  # type: ignore
        step = 0.0 if t is None else net.edges[eid].weight * t  # type: ignore
        outage[v] = outage[tree.parent[v]] + step  # type: ignore
    return outage


def evaluate_metrics(
    net: Network,
    tree: TreeConfig,
    ordering: Any,
    uncovered_mode: str = "exclude",
    coverage: Optional[CoverageMap] = None,
) -> MetricsReport:
    """R-Time, SAIDI and Energy of ``tree`` restored in ``ordering``.

    ``ordering`` is an :class:`~radial_restore.mssc.Ordering` or a plain
    sequence of switch ids. In ``exclude`` mode uncovered tree edges leave the
    R-Time sums and the SAIDI numerator and their share of the exposure is
    reported; in ``penalty`` mode they are restored at time |S| + 1.
    """
    cov = coverage if coverage is not None else compute_coverage(net, tree)
    raw = cover_times(cov, ordering)
    times = _effective_times(cov, ordering, uncovered_mode)

    rt_num: List[float] = []
    rt_den: List[float] = []
    sd_num: List[float] = []
    exposure: List[float] = []
    lost: List[float] = []
    for eid in natural_sorted(tree.edges):
        p = net.edges[eid].weight
        f = tree.flow[eid]
        exposure.append(f * p)
        if raw[eid] is None:
            lost.append(f * p)
        t = times[eid]
        if t is None:
            continue
        rt_num.append(p * t)
        rt_den.append(p)
        sd_num.append(f * p * t)

    denom_p = math.fsum(rt_den)
    demand = net.total_demand()
    total_exposure = math.fsum(exposure)
    if lost:
        get_logger().debug(
            "%i tree edges are not covered by any switch (%s mode)", len(lost), uncovered_mode
        )

    outage = per_vertex_outage(net, tree, ordering, uncovered_mode, cov)
    by_class: Dict[str, List[float]] = {}
    for vid, value in outage.items():
        if vid == net.root:
            continue
        by_class.setdefault(net.vertices[vid].voltage_class, []).append(value)

    return MetricsReport(
        r_time=math.fsum(rt_num) / denom_p if denom_p > 0 else 0.0,
        saidi=math.fsum(sd_num) / demand if demand > 0 else 0.0,
        energy=energy_loss(net, tree),
        uncovered_exposure=math.fsum(lost) / total_exposure if total_exposure > 0 else 0.0,
        class_outage={k: math.fsum(v) / len(v) for k, v in sorted(by_class.items())},
        cover_times=times,
        switch_count=len(cov.switch_edges),
        uncovered_mode=uncovered_mode,
    )
