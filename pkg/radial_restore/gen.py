"""Instance generators and brute-force oracles.

The generators build the small networks and hypergraphs behind the worked
examples: the wheel, the greedy gap network, the integrality-gap family, the
tree augmentation reduction and the hypergraph that no network produces.
The oracles answer the same questions by exhaustive search on tiny inputs.
"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import itertools
import math
from dataclasses import dataclass
from dataclasses import replace
from typing import Any
from typing import Dict
from typing import Iterator
from typing import List
from typing import Optional
from typing import Tuple

import networkx as nx
import numpy as np
from traitlets.log import get_logger

from .errors import DegenerateParams
from .errors import EmptyInstance
from .errors import NoAugmentation
from .errors import TooLarge
from .mssc import exact_order_dp
from .mssc import instance_from_coverage
from .mssc import MsscInstance
from .mssc import Ordering
from .netgraph import build_tree_config
from .netgraph import compute_coverage
from .netgraph import Edge
from .netgraph import evaluate_metrics
from .netgraph import MetricsReport
from .netgraph import Network
from .netgraph import TreeConfig
from .netgraph import Vertex
from .utils import data_file
from .utils import natural_sorted

# --- fixed networks ----------------------------------------------------------------------------


@dataclass(frozen=True)
class WheelFixture:
    network: Network
    spoke_tree: frozenset
    wheel_tree: frozenset


def gen_wheel(n: int = 7) -> WheelFixture:
    """A hub joined to a rim cycle of n - 1 vertices, all data set to one.

    The ``spoke`` tree is every spoke; the ``wheel`` tree is the first spoke
    followed by the rim path around to the last rim vertex.
    """
    if n < 4:
        raise DegenerateParams("A wheel needs a hub and at least three rim vertices")
    rim = n - 1
    vertices = {"hub": Vertex("hub", demand=1.0, x=0.0, y=0.0)}
    for i in range(1, rim + 1):
        angle = 2 * math.pi * (i - 1) / rim
        vid = "r%i" % i
        x, y = round(math.cos(angle), 12), round(math.sin(angle), 12)
        vertices[vid] = Vertex(vid, demand=1.0, x=x, y=y)
    edges = {}
    for i in range(1, rim + 1):
        edges["spoke%i" % i] = Edge("spoke%i" % i, "hub", "r%i" % i, 1.0, 1.0)
        edges["rim%i" % i] = Edge("rim%i" % i, "r%i" % i, "r%i" % (i % rim + 1), 1.0, 1.0)
    spoke = frozenset("spoke%i" % i for i in range(1, rim + 1))
    wheel = frozenset(["spoke1"] + ["rim%i" % i for i in range(1, rim)])
    net = Network(vertices=vertices, edges=edges, root="hub", default_tree=wheel)
    return WheelFixture(network=net, spoke_tree=spoke, wheel_tree=wheel)


def gen_greedy_gap_example() -> Tuple[Network, TreeConfig]:
    """Five vertices where lexicographic greedy pays 7/4 against an optimum of 3/2.

    The tree is two 2-paths below ``s``; switch s1 joins their upper ends
    and s2, s3 join ``s`` to the lower ends.
    """
    spots = {
        "s": (0.0, 0.0),
        "v1": (-1.0, -1.0),
        "v2": (-1.0, -2.0),
        "v3": (1.0, -1.0),
        "v4": (1.0, -2.0),
    }
    vertices = {v: Vertex(v, demand=1.0, x=x, y=y) for v, (x, y) in spots.items()}
    pairs = [
        ("s-v1", "s", "v1"),
        ("v1-v2", "v1", "v2"),
        ("s-v3", "s", "v3"),
        ("v3-v4", "v3", "v4"),
        ("s1", "v1", "v3"),
        ("s2", "s", "v2"),
        ("s3", "s", "v4"),
    ]
    edges = {eid: Edge(eid, u, v, 1.0, 1.0) for eid, u, v in pairs}
    tree = frozenset(["s-v1", "v1-v2", "s-v3", "v3-v4"])
    net = Network(vertices=vertices, edges=edges, root="s", default_tree=tree)
    return net, build_tree_config(net, tree)


def gen_mssc_non_mrt_fixture() -> MsscInstance:
    """({1,2,3,4}, {{1,2,3},{1,4},{2,4},{3,4}}): no network has this coverage."""
    return MsscInstance.build(
        ["1", "2", "3", "4"],
        [(("1", "2", "3"), 1.0), (("1", "4"), 1.0), (("2", "4"), 1.0), (("3", "4"), 1.0)],
    )


def gen_sample_network() -> Network:
    """The bundled 200-bus feeder."""
    from .prep import ingest_csv

    return ingest_csv(data_file("sample", "buses.csv"), data_file("sample", "lines.csv"))


# --- integrality gap ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapFamilyParams:
    c: int = 3
    N: int = 9
    k: int = 2
    epsilon: float = 0.05

    def __post_init__(self):
        if self.c < 2 or self.N < 1 or self.k < 1 or not self.epsilon > 0:
            raise DegenerateParams(
                "Gap family needs c >= 2, N >= 1, k >= 1 and epsilon > 0, got %r" % (self,)
            )

    @property
    def alpha(self) -> float:
        return 2.0 / (self.c + 1) + self.epsilon

    def block_sizes(self) -> List[int]:
        return [int(round(self.N * i ** -self.alpha)) for i in range(1, self.k + 1)]

    def to_dict(self) -> Dict[str, Any]:
        return dict(c=self.c, N=self.N, k=self.k, epsilon=self.epsilon, alpha=self.alpha)


@dataclass(frozen=True)
class GapInstance:
    """Disjoint complete c-uniform blocks and a feasible fractional schedule.

    ``x`` and ``u`` follow the row order of ``instance.vertices`` and
    ``instance.hyperedges``.
    """

    instance: MsscInstance
    params: GapFamilyParams
    blocks: Tuple[int, ...]
    dropped: Tuple[int, ...]
    horizon: int
    x: np.ndarray
    u: np.ndarray

    @property
    def point_cost(self) -> float:
        t = np.arange(1, self.horizon + 1)
        return float(self.instance.weights() @ (self.u @ t))


def gen_integrality_gap(params: GapFamilyParams, horizon: Optional[int] = None) -> GapInstance:
    """Blocks K_i on n_i = round(N i^-alpha) vertices with every c-subset a hyperedge.

    Blocks smaller than c are dropped. Block i spreads evenly over the time
    window (A_{i-1}, A_i] with A_i = (n_1 + ... + n_i) / c; slots past A_k
    carry a uniform x and no coverage.
    """
    c = params.c
    sizes = params.block_sizes()
    kept = tuple(s for s in sizes if s >= c)
    dropped = tuple(i + 1 for i, s in enumerate(sizes) if s < c)
    if dropped:
        get_logger().warning("Dropping gap blocks smaller than c=%i: %s", c, list(dropped))
    if not kept:
        raise DegenerateParams("Every block of %r is smaller than c" % (params,))

    block_of: Dict[str, int] = {}
    hyperedges = []
    for b, size in enumerate(kept):
        ids = ["k%iv%i" % (b + 1, j) for j in range(1, size + 1)]
        for v in ids:
            block_of[v] = b
        hyperedges.extend((members, 1.0) for members in itertools.combinations(ids, c))
    inst = MsscInstance.build(block_of, hyperedges)

    ends = np.cumsum([s / c for s in kept])
    starts = np.concatenate([[0.0], ends[:-1]])
    big_h = inst.n if horizon is None else int(horizon)
    if big_h < math.ceil(ends[-1] - 1e-9):
        raise DegenerateParams("Horizon %i ends before the schedule at %g" % (big_h, ends[-1]))
    slots = np.arange(1, big_h + 1, dtype=float)
    # overlap of slot [t-1, t] with each block window
    overlap = np.clip(
        np.minimum(slots[None, :], ends[:, None]) - np.maximum(slots[None, :] - 1, starts[:, None]),
        0.0,
        None,
    )
    leftover = np.clip(slots - ends[-1], 0.0, 1.0)

    x = np.empty((inst.n, big_h))
    for v in inst.vertices:
        b = block_of[v]
        x[inst.index(v)] = overlap[b] / kept[b] + leftover / inst.n
    u = np.empty((inst.m, big_h))
    for j, h in enumerate(inst.hyperedges):
        b = block_of[h.members[0]]
        u[j] = c * overlap[b] / kept[b]
    return GapInstance(
        instance=inst,
        params=params,
        blocks=kept,
        dropped=dropped,
        horizon=big_h,
        x=x,
        u=u,
    )


# --- tree augmentation -------------------------------------------------------------------------


@dataclass(frozen=True)
class TapReduction:
    network: Network
    tree: TreeConfig
    weights: Dict[str, float]
    hub: str
    original_switches: Tuple[str, ...]
    path_switches: Tuple[str, ...]


def _fresh_prefix(taken: set, prefix: str) -> str:
    while any(t.startswith(prefix) for t in taken):
        prefix = "_" + prefix
    return prefix


def gen_tap_reduction(net: Network, tree: TreeConfig, max_vertices: int = 2000) -> TapReduction:
    """Reduce tree augmentation on (net, tree) to a reconnection instance.

    With n vertices and m edges, mn two-paths hang off the root, each closed
    by one new switch. Original tree edges weigh 1 and path edges 1/2.
    """
    n, m = len(net.vertices), len(net.edges)
    count = m * n
    size = n + 2 * count
    if size > max_vertices:
        raise TooLarge("Reduced network", size, max_vertices)
    hub = net.root
    vp = _fresh_prefix(set(net.vertices), "tap")
    ep = _fresh_prefix(set(net.edges), "tap")
    vertices = dict(net.vertices)
    edges = dict(net.edges)
    for e in tree.edges:
        edges[e] = replace(net.edges[e], weight=1.0)
    weights = {e: 1.0 for e in tree.edges}
    path_switches = []
    for i in range(1, count + 1):
        a, b = "%s%i_1" % (vp, i), "%s%i_2" % (vp, i)
        vertices[a] = Vertex(a)
        vertices[b] = Vertex(b)
        for eid, u, v in (
            ("%s%i_1" % (ep, i), hub, a),
            ("%s%i_2" % (ep, i), a, b),
        ):
            edges[eid] = Edge(eid, u, v, 0.5, 0.0)
            weights[eid] = 0.5
        sid = "%s%i_s" % (ep, i)
        edges[sid] = Edge(sid, hub, b, 1.0, 0.0)
        path_switches.append(sid)
    tree_edges = frozenset(weights)
    reduced = Network(vertices=vertices, edges=edges, root=hub, default_tree=tree_edges)
    return TapReduction(
        network=reduced,
        tree=build_tree_config(reduced, tree_edges),
        weights=weights,
        hub=hub,
        original_switches=tuple(net.switch_ids(tree.edges)),
        path_switches=tuple(path_switches),
    )


def tap_prefix_size(reduction: TapReduction, ordering: Optional[Ordering] = None) -> int:
    """Original switches that cover something new in an optimal ordering of the reduction."""
    cov = compute_coverage(reduction.network, reduction.tree)
    if ordering is None:
        ordering = exact_order_dp(instance_from_coverage(cov, reduction.weights))
    originals = set(reduction.original_switches)
    covered: set = set()
    count = 0
    for s in ordering.sequence:
        fresh = set(cov.switch_edges[s]) - covered
        covered |= fresh
        if s in originals and fresh:
            count += 1
    return count


def brute_force_tap(net: Network, tree: TreeConfig, limit: int = 20) -> int:
    """Fewest switches whose addition makes the tree 2-edge-connected."""
    switches = net.switch_ids(tree.edges)
    if len(switches) > limit:
        raise TooLarge("Switch set", len(switches), limit)
    if nx.has_bridges(net.to_networkx()):
        raise NoAugmentation("The whole network has a bridge; no augmentation exists")
    base = nx.Graph()
    base.add_nodes_from(net.vertices)
    base.add_edges_from((net.edges[e].u, net.edges[e].v) for e in tree.edges)
    for k in range(len(switches) + 1):
        for chosen in itertools.combinations(switches, k):
            g = base.copy()
            g.add_edges_from((net.edges[s].u, net.edges[s].v) for s in chosen)
            if not nx.has_bridges(g):
                return k
    raise NoAugmentation("No subset of switches augments the tree")


def tap_leaf_lower_bound(tree: TreeConfig) -> int:
    """Each added edge can cover the pendant edges of at most two leaves."""
    degree: Dict[str, int] = {v: 0 for v in tree.parent}
    for v, p in tree.parent.items():
        if p is not None:
            degree[v] += 1
            degree[p] += 1
    leaves = sum(1 for d in degree.values() if d == 1)
    return math.ceil(leaves / 2)


# --- exhaustive search over trees --------------------------------------------------------------


def enumerate_spanning_trees(net: Network) -> Iterator[frozenset]:
    """Every spanning tree of ``net`` as a set of edge ids, in a fixed order."""
    ids = natural_sorted(net.edges)
    size = len(net.vertices) - 1
    for chosen in itertools.combinations(ids, size):
        root = {v: v for v in net.vertices}

        def find(v: str) -> str:
            while root[v] != v:
                root[v] = root[root[v]]
                v = root[v]
            return v

        for eid in chosen:
            a, b = find(net.edges[eid].u), find(net.edges[eid].v)
            if a == b:
                break
            root[a] = b
        else:
            yield frozenset(chosen)


JOINT_METRICS = ("rtime", "saidi", "energy")


@dataclass(frozen=True)
class JointOptimum:
    tree: frozenset
    ordering: Ordering
    value: float
    metrics: MetricsReport
    trees_checked: int


def _exact_for(net: Network, tree: TreeConfig, metric: str) -> Ordering:
    cov = compute_coverage(net, tree)
    weights = {e: net.edges[e].weight for e in tree.edges}
    if metric == "saidi":
        weights = {e: weights[e] * tree.flow[e] for e in tree.edges}
    inst = instance_from_coverage(cov, weights, log_dropped=False)
    try:
        return exact_order_dp(inst)
    except EmptyInstance:
        return Ordering.of(inst, inst.vertices)


def brute_force_joint(net: Network, metric: str = "energy", limit: int = 8) -> JointOptimum:
    """The spanning tree and ordering minimizing ``metric`` over all trees."""
    if metric not in JOINT_METRICS:
        raise ValueError("metric must be one of %s" % (JOINT_METRICS,))
    if len(net.vertices) > limit:
        raise TooLarge("Joint search network", len(net.vertices), limit)
    best: Optional[JointOptimum] = None
    checked = 0
    for edges in enumerate_spanning_trees(net):
        checked += 1
        tree = build_tree_config(net, edges)
        ordering = _exact_for(net, tree, "saidi" if metric == "saidi" else "rtime")
        report = evaluate_metrics(net, tree, ordering)
        value = {"rtime": report.r_time, "saidi": report.saidi, "energy": report.energy}[metric]
        if best is None or value < best.value - 1e-12 * max(1.0, abs(best.value)):
            best = JointOptimum(edges, ordering, value, report, 0)
    assert best is not None
    return JointOptimum(best.tree, best.ordering, best.value, best.metrics, checked)
