"""Preparing feeder data: CSV ingestion, tree contraction and switch placement"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import math
from dataclasses import dataclass
from dataclasses import replace
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree
from traitlets.log import get_logger

from .errors import DuplicateEdge
from .errors import MissingCoordinates
from .errors import MissingRoot
from .errors import ParseError
from .netgraph import build_tree_config
from .netgraph import compute_coverage
from .netgraph import Edge
from .netgraph import Network
from .netgraph import TreeConfig
from .netgraph import Vertex
from .netgraph import VOLTAGE_CLASSES
from .utils import natural_key
from .utils import natural_sorted

BUS_COLUMNS = ["bus_id", "x", "y", "demand_kw", "voltage_class", "is_root"]
LINE_COLUMNS = ["line_id", "from_bus", "to_bus", "status", "resistance"]
LINE_STATUSES = ("tree", "switch")

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}


def _read_table(path: str, columns: List[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, comment="#", skipinitialspace=True
        )
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(str(e), path)
    frame.columns = [str(c).strip() for c in frame.columns]
    for column in columns:
        if column not in frame.columns:
            raise ParseError("missing column %r" % column, path, 1, column)
    return frame


def _number(raw: str, path: str, row: int, column: str, allow_empty: bool = False) -> Any:
    raw = raw.strip()
    if not raw and allow_empty:
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ParseError("%r is not a number" % raw, path, row, column)
    if not math.isfinite(value):
        raise ParseError("%r is not finite" % raw, path, row, column)
    return value


def ingest_csv(buses_path: str, lines_path: str) -> Network:
    """Read a feeder from ``buses.csv`` and ``lines.csv``.

    A line's failure weight is the straight-line distance between its end
    buses in meters; lines with status ``tree`` form the network's default
    tree and the rest are switches.
    """
    buses = _read_table(buses_path, BUS_COLUMNS)
    vertices: Dict[str, Vertex] = {}
    roots: List[str] = []
    for i, rec in enumerate(buses.to_dict("records")):
        row = i + 2
        bus = rec["bus_id"].strip()
        if not bus:
            raise ParseError("empty bus id", buses_path, row, "bus_id")
        if bus in vertices:
            raise ParseError("bus %r appears twice" % bus, buses_path, row, "bus_id")
        x = _number(rec["x"], buses_path, row, "x", allow_empty=True)
        y = _number(rec["y"], buses_path, row, "y", allow_empty=True)
        demand = _number(rec["demand_kw"], buses_path, row, "demand_kw")
        if demand < 0:
            raise ParseError("negative demand", buses_path, row, "demand_kw")
        vclass = rec["voltage_class"].strip().upper()
        if vclass not in VOLTAGE_CLASSES:
            raise ParseError("unknown voltage class %r" % vclass, buses_path, row, "voltage_class")
        flag = rec["is_root"].strip().lower()
        if flag not in _TRUE | _FALSE:
            raise ParseError("%r is not a boolean" % flag, buses_path, row, "is_root")
        if flag in _TRUE:
            roots.append(bus)
        vertices[bus] = Vertex(id=bus, demand=demand, x=x, y=y, voltage_class=vclass)
    if not roots:
        raise MissingRoot("No bus in %s is flagged as the root" % buses_path)
    if len(roots) > 1:
        raise ParseError("several root buses: %s" % ", ".join(roots), buses_path, 0, "is_root")

    lines = _read_table(lines_path, LINE_COLUMNS)
    edges: Dict[str, Edge] = {}
    tree: List[str] = []
    for i, rec in enumerate(lines.to_dict("records")):
        row = i + 2
        lid = rec["line_id"].strip()
        if not lid:
            raise ParseError("empty line id", lines_path, row, "line_id")
        if lid in edges:
            raise DuplicateEdge("Line %r appears twice in %s" % (lid, lines_path), edge_id=lid)
        ends = []
        for column in ("from_bus", "to_bus"):
            bus = rec[column].strip()
            if bus not in vertices:
                raise ParseError("unknown bus %r" % bus, lines_path, row, column)
            ends.append(vertices[bus])
        status = rec["status"].strip().lower()
        if status not in LINE_STATUSES:
            raise ParseError("status must be tree or switch", lines_path, row, "status")
        resistance = _number(rec["resistance"], lines_path, row, "resistance")
        if resistance < 0:
            raise ParseError("negative resistance", lines_path, row, "resistance")
        for end in ends:
            if not end.has_coordinates:
                raise MissingCoordinates(end.id)
        length = math.hypot(ends[0].x - ends[1].x, ends[0].y - ends[1].y)  # type: ignore
        edges[lid] = Edge(id=lid, u=ends[0].id, v=ends[1].id, weight=length, resistance=resistance)
        if status == "tree":
            tree.append(lid)

    net = Network(vertices=vertices, edges=edges, root=roots[0], default_tree=frozenset(tree))
    get_logger().info(
        "Read %i buses and %i lines (%i switches)",
        len(vertices),
        len(edges),
        len(edges) - len(tree),
    )
    return net


# --- contraction -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionMap:
    """What contraction did to a network.

    ``vertex_map`` sends every original vertex to the vertex that absorbed
    it (itself if it survived); ``edge_provenance`` lists the original tree
    edges fused into each surviving tree edge.
    """

    vertex_map: Dict[str, str]
    edge_provenance: Dict[str, Tuple[str, ...]]
    dropped_switches: Tuple[str, ...]
    steps: Tuple[Dict[str, Any], ...]
    threshold: float
    pre_update_weight: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            vertex_map=self.vertex_map,
            edge_provenance={k: list(v) for k, v in self.edge_provenance.items()},
            dropped_switches=list(self.dropped_switches),
            steps=list(self.steps),
            threshold=self.threshold,
            pre_update_weight=self.pre_update_weight,
        )


def contract_tree(
    net: Network, tree: TreeConfig, threshold: float, pre_update_weight: bool = False
) -> Tuple[Network, TreeConfig, ContractionMap]:
    """Shrink ``tree`` by absorbing light leaves and series vertices.

    Until nothing changes, for every non-root vertex v:

    - a leaf with demand below ``threshold`` merges into its parent u; the
      edge above u gains p(uv) w(v) / w(u), with w(u) taken after the merge
      unless ``pre_update_weight`` is set;
    - a vertex with exactly two tree neighbours hands half its demand to each
      and its two edges fuse into one with summed failure weight and
      resistance, keeping the upstream edge id.

    Switches follow their endpoints; those that become loops or duplicate an
    edge are dropped.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    demand = {v: net.vertices[v].demand for v in net.vertices}
    parent = dict(tree.parent)
    parent_edge = dict(tree.parent_edge)
    children: Dict[str, set] = {v: set(kids) for v, kids in tree.children.items()}
    ends = {e: [net.edges[e].u, net.edges[e].v] for e in tree.edges}
    weight = {e: net.edges[e].weight for e in tree.edges}
    resistance = {e: net.edges[e].resistance for e in tree.edges}
    provenance = {e: (e,) for e in tree.edges}
    absorbed: Dict[str, str] = {}
    steps: List[Dict[str, Any]] = []
    log = get_logger()

    changed = True
    while changed:
        changed = False
        for v in reversed(tree.order):
            if v == tree.root or v in absorbed:
                continue
            kids = children[v]
            u = parent[v]
            if not kids and demand[v] < threshold:
                uv = parent_edge[v]
                before = demand[u]
                demand[u] += demand[v]
                up = parent_edge[u]
                denom = before if pre_update_weight else demand[u]
                if up is not None and denom > 0:
                    weight[up] += weight[uv] * demand[v] / denom
                children[u].discard(v)
                for gone in (ends, weight, resistance, provenance):
                    del gone[uv]  # type: ignore
                absorbed[v] = u  # type: ignore
                demand[v] = 0.0
                steps.append(dict(rule="leaf", vertex=v, into=u, edge=uv))
                log.debug("Contracted leaf %s into %s", v, u)
                changed = True
            elif len(kids) == 1:
                (x,) = tuple(kids)
                upper, lower = parent_edge[v], parent_edge[x]
                half = demand[v] / 2.0
                demand[u] += half
                demand[x] += demand[v] - half
                demand[v] = 0.0
                ends[upper] = [u, x]  # type: ignore
                weight[upper] += weight[lower]  # type: ignore
                resistance[upper] += resistance[lower]  # type: ignore
                provenance[upper] += provenance[lower]  # type: ignore
                for gone in (ends, weight, resistance, provenance):
                    del gone[lower]  # type: ignore
                children[u].discard(v)
                children[u].add(x)
                parent[x] = u
                parent_edge[x] = upper
                absorbed[v] = u  # type: ignore
                steps.append(dict(rule="series", vertex=v, into=u, edge=upper, fused=lower))
                log.debug("Fused %s and %s through %s", upper, lower, v)
                changed = True

    def resolve(v: str) -> str:
        while v in absorbed:
            v = absorbed[v]
        return v

    alive = [v for v in net.vertices if v not in absorbed]
    vertices = {v: replace(net.vertices[v], demand=demand[v]) for v in alive}
    edges: Dict[str, Edge] = {}
    pairs = set()
    for e in natural_sorted(ends):
        a, b = ends[e]
        edges[e] = Edge(id=e, u=a, v=b, weight=weight[e], resistance=resistance[e])
        pairs.add(frozenset((a, b)))
    dropped = []
    for s in net.switch_ids(tree.edges):
        sw = net.edges[s]
        a, b = resolve(sw.u), resolve(sw.v)
        pair = frozenset((a, b))
        if a == b or pair in pairs:
            dropped.append(s)
            continue
        pairs.add(pair)
        edges[s] = Edge(id=s, u=a, v=b, weight=sw.weight, resistance=sw.resistance)
    if dropped:
        log.warning("Dropped %i switches whose ends merged: %s", len(dropped), ", ".join(dropped))

    contracted = Network(
        vertices=vertices, edges=edges, root=net.root, default_tree=frozenset(ends)
    )
    new_tree = build_tree_config(contracted, ends)
    mapping = ContractionMap(
        vertex_map={v: resolve(v) for v in natural_sorted(net.vertices)},
        edge_provenance={e: provenance[e] for e in natural_sorted(provenance)},
        dropped_switches=tuple(dropped),
        steps=tuple(steps),
        threshold=threshold,
        pre_update_weight=pre_update_weight,
    )
    log.info(
        "Contracted %i vertices to %i (threshold %g kW)",
        len(net.vertices),
        len(vertices),
        threshold,
    )
    return contracted, new_tree, mapping


# --- switch placement --------------------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    u: str
    v: str
    length: float

    def to_dict(self) -> Dict[str, Any]:
        return dict(u=self.u, v=self.v, length=self.length)


def candidate_switches(
    net: Network, max_length: float, cap: Optional[int] = None
) -> List[Candidate]:
    """Vertex pairs closer than ``max_length`` that are not yet joined, shortest first."""
    ids = natural_sorted(net.vertices)
    for v in ids:
        if not net.vertices[v].has_coordinates:
            raise MissingCoordinates(v)
    if max_length <= 0 or len(ids) < 2:
        return []
    points = np.array([[net.vertices[v].x, net.vertices[v].y] for v in ids], dtype=float)
    pairs = cKDTree(points).query_pairs(r=max_length, output_type="ndarray")
    found = []
    for i, j in pairs:
        a, b = ids[int(i)], ids[int(j)]
        if natural_key(b) < natural_key(a):
            a, b = b, a
        if net.edge_between(a, b) is not None:
            continue
        length = float(np.hypot(*(points[int(i)] - points[int(j)])))
        if length < max_length:
            found.append(Candidate(a, b, length))
    found.sort(key=lambda c: (c.length, natural_key(c.u), natural_key(c.v)))
    if cap is not None:
        found = found[:cap]
    return found


@dataclass(frozen=True)
class PlannedSwitch:
    id: str
    u: str
    v: str
    length: float
    score: float
    covered_fraction: float

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            id=self.id,
            u=self.u,
            v=self.v,
            length=self.length,
            score=self.score,
            covered_fraction=self.covered_fraction,
        )


@dataclass(frozen=True)
class SwitchPlan:
    """Switches chosen in order, with the covered exposure fraction after each."""

    added: Tuple[PlannedSwitch, ...]
    initial_fraction: float
    resistance_per_m: float = 0.0

    @property
    def coverage_curve(self) -> List[float]:
        return [self.initial_fraction] + [s.covered_fraction for s in self.added]

    @property
    def covered_fraction(self) -> float:
        return self.coverage_curve[-1]

    def apply(self, net: Network) -> Network:
        return net.with_edges(
            Edge(
                id=s.id,
                u=s.u,
                v=s.v,
                weight=s.length,
                resistance=s.length * self.resistance_per_m,
            )
            for s in self.added
        )

    def curve_rows(self) -> List[Dict[str, Any]]:
        rows = [dict(step=0, switch="", covered_fraction=self.initial_fraction, score=0.0)]
        for i, s in enumerate(self.added, 1):
            rows.append(
                dict(step=i, switch=s.id, covered_fraction=s.covered_fraction, score=s.score)
            )
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            added=[s.to_dict() for s in self.added],
            initial_fraction=self.initial_fraction,
            covered_fraction=self.covered_fraction,
            resistance_per_m=self.resistance_per_m,
        )


def _resistance_per_m(net: Network) -> float:
    ratios = [e.resistance / e.weight for e in net.edges.values() if e.weight > 0]
    return float(np.median(ratios)) if ratios else 0.0


def greedy_add_switches(
    net: Network,
    tree: TreeConfig,
    candidates: Sequence[Candidate],
    k: int,
    target: float = 1.0,
    id_prefix: str = "new",
) -> SwitchPlan:
    """Pick up to ``k`` candidates by weighted coverage of exposure f(e) p(e).

    A candidate scores the exposure of each tree edge on its cycle, halved
    once for every switch that already covers that edge. Selection stops
    early once the covered share of total exposure reaches ``target``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    exposure = {e: tree.flow[e] * net.edges[e].weight for e in tree.edges}
    total = math.fsum(exposure.values())
    cov = compute_coverage(net, tree)
    count = {e: len(cov.edge_switches[e]) for e in tree.edges}

    def fraction() -> float:
        if total <= 0:
            return 1.0
        return math.fsum(x for e, x in exposure.items() if count[e] > 0) / total

    paths = [tree.path(c.u, c.v) for c in candidates]
    taken = [False] * len(candidates)
    used_ids = set(net.edges)
    added: List[PlannedSwitch] = []
    start = current = fraction()
    serial = 0
    while len(added) < k and current < target:
        best, best_score = -1, 0.0
        for i, path in enumerate(paths):
            if taken[i]:
                continue
            score = math.fsum(exposure[e] * 2.0 ** -count[e] for e in path)
            if score > best_score:
                best, best_score = i, score
        if best < 0:
            break
        taken[best] = True
        for e in paths[best]:
            count[e] += 1
        current = fraction()
        serial += 1
        sid = "%s%i" % (id_prefix, serial)
        while sid in used_ids:
            serial += 1
            sid = "%s%i" % (id_prefix, serial)
        used_ids.add(sid)
        c = candidates[best]
        added.append(PlannedSwitch(sid, c.u, c.v, c.length, best_score, current))
        get_logger().debug("Added switch %s (%s-%s), covered %.4f", sid, c.u, c.v, current)
    return SwitchPlan(
        added=tuple(added), initial_fraction=start, resistance_per_m=_resistance_per_m(net)
    )
