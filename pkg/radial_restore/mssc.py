"""Min Sum Set Cover: instances, orderings and ordering algorithms.

An instance is a weighted hypergraph whose vertices are switches and whose
hyperedges are the sets of switches covering one tree edge. An ordering ranks
the vertices 1..n; a hyperedge is covered at the rank of its first member and
the objective is the weighted sum of those cover times.
"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import io
import math
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Dict
from typing import FrozenSet
from typing import Iterable
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from traitlets.log import get_logger

from ._version import __version__
from .errors import BadUniformity
from .errors import EmptyInstance
from .errors import HorizonExhausted
from .errors import NotAPermutation
from .errors import ParseError
from .errors import TooLarge
from .netgraph import CoverageMap
from .utils import natural_key
from .utils import natural_sorted
from .utils import sub_rng

TIE_RULES = ("lexicographic", "random")

# exact solving beyond this many non-isolated vertices is refused
DP_LIMIT = 24

DUMMY_PREFIX = "_dummy"


@dataclass(frozen=True)
class Hyperedge:
    members: Tuple[str, ...]
    weight: float = 1.0
    labels: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return dict(members=list(self.members), weight=self.weight, labels=list(self.labels))


@dataclass(frozen=True)
class MsscInstance:
    """A weighted hypergraph. Build with :meth:`build` to merge duplicates.

    ``dummies`` marks padding vertices added by :func:`pad_to_uniform`;
    ``uncovered`` lists the tree edges that had no covering switch.
    """

    vertices: Tuple[str, ...]
    hyperedges: Tuple[Hyperedge, ...]
    dummies: FrozenSet[str] = frozenset()
    uncovered: Tuple[str, ...] = ()
    _index: Dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {v: i for i, v in enumerate(self.vertices)}
        if len(index) != len(self.vertices):
            raise ValueError("Vertex ids must be unique")
        seen = set()
        for h in self.hyperedges:
            if not h.members:
                raise ValueError("Hyperedges must be nonempty")
            if not (math.isfinite(h.weight) and h.weight >= 0):
                raise ValueError("Hyperedge weight %r is not a nonnegative number" % h.weight)
            for v in h.members:
                if v not in index:
                    raise ValueError("Hyperedge member %r is not a vertex" % v)
            key = frozenset(h.members)
            if key in seen:
                raise ValueError("Duplicate hyperedge %s; use MsscInstance.build" % sorted(key))
            seen.add(key)
        if not self.dummies <= set(index):
            raise ValueError("Dummy markers must name vertices")
        object.__setattr__(self, "_index", index)

    @classmethod
    def build(
        cls,
        vertices: Iterable[str],
        hyperedges: Iterable[Any],
        dummies: Iterable[str] = (),
        uncovered: Iterable[str] = (),
    ) -> "MsscInstance":
        """Normalize and construct.

        ``hyperedges`` holds :class:`Hyperedge` objects or ``(members, weight)``
        / ``(members, weight, labels)`` tuples. Hyperedges with the same member
        set are merged with their weights summed, which leaves the objective of
        every ordering unchanged.
        """
        merged: Dict[FrozenSet[str], List[Any]] = {}
        for item in hyperedges:
            if isinstance(item, Hyperedge):
                members, weight, labels = item.members, item.weight, item.labels
            else:
                members, weight = item[0], item[1]
                labels = tuple(item[2]) if len(item) > 2 else ()
            key = frozenset(members)
            if key in merged:
                merged[key][0].append(float(weight))
                merged[key][1].extend(labels)
            else:
                merged[key] = [[float(weight)], list(labels)]
        edges = tuple(
            Hyperedge(
                members=tuple(natural_sorted(key)),
                weight=math.fsum(weights),
                labels=tuple(natural_sorted(labels)),
            )
            for key, (weights, labels) in merged.items()
        )
        return cls(
            vertices=tuple(natural_sorted(set(vertices))),
            hyperedges=edges,
            dummies=frozenset(dummies),
            uncovered=tuple(natural_sorted(uncovered)),
        )

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.hyperedges)

    @property
    def c(self) -> int:
        return max((len(h.members) for h in self.hyperedges), default=0)

    @property
    def total_weight(self) -> float:
        return math.fsum(h.weight for h in self.hyperedges)

    def index(self, vertex: str) -> int:
        return self._index[vertex]

    def member_indices(self) -> List[np.ndarray]:
        return [
            np.array([self._index[v] for v in h.members], dtype=np.intp) for h in self.hyperedges
        ]

    def weights(self) -> np.ndarray:
        return np.array([h.weight for h in self.hyperedges], dtype=float)

    def without_dummies(self) -> "MsscInstance":
        if not self.dummies:
            return self
        return MsscInstance.build(
            (v for v in self.vertices if v not in self.dummies),
            (
                (tuple(v for v in h.members if v not in self.dummies), h.weight, h.labels)
                for h in self.hyperedges
            ),
            uncovered=self.uncovered,
        )

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            vertices=list(self.vertices),
            hyperedges=[h.to_dict() for h in self.hyperedges],
            dummies=natural_sorted(self.dummies),
            uncovered=list(self.uncovered),
        )


@dataclass(frozen=True)
class Ordering:
    """A ranking of instance vertices with the cover times it induces.

    ``cover_times[j]`` belongs to ``hyperedges[j]`` of the instance the
    ordering was built for.
    """

    sequence: Tuple[str, ...]
    cover_times: Tuple[int, ...]
    objective: float
    total_weight: float

    @classmethod
    def of(cls, inst: MsscInstance, sequence: Iterable[str]) -> "Ordering":
        seq = tuple(sequence)
        rank = {v: i + 1 for i, v in enumerate(seq)}
        if len(rank) != len(seq) or set(rank) != set(inst.vertices):
            raise NotAPermutation(
                "Ordering must list each of the %i vertices exactly once" % inst.n
            )
        times = tuple(min(rank[v] for v in h.members) for h in inst.hyperedges)
        objective = math.fsum(h.weight * t for h, t in zip(inst.hyperedges, times))
        return cls(
            sequence=seq, cover_times=times, objective=objective, total_weight=inst.total_weight
        )

    @property
    def rank(self) -> Dict[str, int]:
        return {v: i + 1 for i, v in enumerate(self.sequence)}

    @property
    def normalized(self) -> float:
        """Objective per unit of hyperedge weight."""
        return self.objective / self.total_weight if self.total_weight > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            sequence=list(self.sequence),
            objective=self.objective,
            normalized=self.normalized,
        )


def instance_from_coverage(
    cov: CoverageMap, weights: Mapping[str, float], log_dropped: bool = True
) -> MsscInstance:
    """One hyperedge per covered tree edge, weighted by ``weights``.

    Tree edges without a covering switch are dropped and listed in
    ``uncovered`` of the result.
    """
    hyperedges = []
    dropped = []
    for eid in cov.tree_edges:
        switches = cov.edge_switches[eid]
        if not switches:
            dropped.append(eid)
            continue
        weight = float(weights[eid])
        if not (math.isfinite(weight) and weight >= 0):
            raise ValueError("Weight of tree edge %r is %r" % (eid, weight))
        hyperedges.append((switches, weight, (eid,)))
    if dropped and log_dropped:
        get_logger().warning(
            "Dropping %i tree edges that no switch covers: %s",
            len(dropped),
            ", ".join(dropped[:10]),
        )
    return MsscInstance.build(cov.switches, hyperedges, uncovered=dropped)


# --- greedy ------------------------------------------------------------------------------------


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def greedy_order(
    inst: MsscInstance, tie_rule: str = "lexicographic", seed: Optional[int] = None
) -> Ordering:
    """Repeatedly take the vertex covering the most uncovered weight.

    Ties go to the naturally smallest vertex id, or to a seeded random
    priority with ``tie_rule="random"``.
    """
    if tie_rule not in TIE_RULES:
        raise ValueError("tie_rule must be one of %s" % (TIE_RULES,))
    if inst.n == 0:
        raise EmptyInstance("Instance has no vertices")
    n = inst.n
    if tie_rule == "random":
        priority = list(sub_rng(seed or 0, 0).permutation(n))
    else:
        priority = list(range(n))

    incidence: List[List[int]] = [[] for _ in range(n)]
    members = inst.member_indices()
    gain = [0.0] * n
    for j, h in enumerate(inst.hyperedges):
        for i in members[j]:
            incidence[i].append(j)
            gain[i] += h.weight

    covered = [False] * inst.m
    placed = [False] * n
    sequence = []
    for _ in range(n):
        best = -1
        for i in range(n):
            if placed[i]:
                continue
            if best < 0:
                best = i
            elif _close(gain[i], gain[best]):
                if priority[i] < priority[best]:
                    best = i
            elif gain[i] > gain[best]:
                best = i
        placed[best] = True
        sequence.append(inst.vertices[best])
        for j in incidence[best]:
            if covered[j]:
                continue
            covered[j] = True
            w = inst.hyperedges[j].weight
            for i in members[j]:
                gain[i] -= w
    return Ordering.of(inst, sequence)


# --- exact -------------------------------------------------------------------------------------


def _split_isolated(inst: MsscInstance) -> Tuple[List[int], List[int], Dict[int, float]]:
    """Vertices whose only hyperedge is their own singleton, and the rest."""
    degree = [0] * inst.n
    single: Dict[int, float] = {}
    for h in inst.hyperedges:
        for v in h.members:
            degree[inst.index(v)] += 1
        if len(h.members) == 1:
            single[inst.index(h.members[0])] = h.weight
    isolated = [i for i in range(inst.n) if degree[i] == 0 or (degree[i] == 1 and i in single)]
    iso = set(isolated)
    core = [i for i in range(inst.n) if i not in iso]
    return core, isolated, single


def _subset_sums(h: np.ndarray, bits: int) -> np.ndarray:
    """S[M] = sum of h[A] over all A contained in M."""
    s = h.copy()
    for i in range(bits):
        view = s.reshape(-1, 2, 1 << i)
        view[:, 1, :] += view[:, 0, :]
    return s


def exact_order_dp(inst: MsscInstance, limit: int = DP_LIMIT) -> Ordering:
    """Optimal ordering by dynamic programming over placed vertex subsets.

    g(P) is the cheapest cost of placing the set P first; each placement
    costs the weight still uncovered before it, so g(V) is the objective.
    Vertices whose only hyperedge is their own singleton are interchangeable
    apart from weight and go in descending weight order; the table therefore
    ranges over subsets of the remaining vertices times the number of such
    vertices already placed. ``limit`` bounds the former, and the whole table
    may hold at most 2**limit cells.
    """
    if inst.n == 0:
        raise EmptyInstance("Instance has no vertices")
    core, isolated, single = _split_isolated(inst)
    k = len(core)
    if k > limit:
        raise TooLarge("Exact ordering core", k, limit)
    cells = (len(isolated) + 1) << k
    if cells > 1 << limit:
        raise TooLarge("Exact ordering table", cells, 1 << limit)

    isolated.sort(key=lambda i: (-single.get(i, 0.0), i))
    iso_w = np.array([single.get(i, 0.0) for i in isolated], dtype=float)
    iso_tail = np.concatenate([np.cumsum(iso_w[::-1])[::-1], [0.0]])
    big_j = len(isolated)

    bit = {v: b for b, v in enumerate(core)}
    size = 1 << k
    h = np.zeros(size)
    for hyper in inst.hyperedges:
        idx = [inst.index(v) for v in hyper.members]
        if len(idx) == 1 and idx[0] not in bit:
            continue
        mask = 0
        for i in idx:
            mask |= 1 << bit[i]
        h[mask] += hyper.weight
    # weight of hyperedges disjoint from Q sits at the complement of Q
    uncov = _subset_sums(h, k)[::-1].copy()

    masks = np.arange(size, dtype=np.int64)
    pop = np.zeros(size, dtype=np.int64)
    for b in range(k):
        pop += (masks >> b) & 1
    layers = [np.flatnonzero(pop == r) for r in range(k + 1)]

    g = np.full((big_j + 1, size), np.inf)
    g[0, 0] = 0.0
    for j in range(big_j + 1):
        for r in range(k + 1):
            if r == 0 and j == 0:
                continue
            sets = layers[r]
            best = np.full(len(sets), np.inf)
            if j > 0:
                best = g[j - 1, sets] + uncov[sets] + iso_tail[j - 1]
            for b in range(k):
                has = ((sets >> b) & 1) == 1
                prev = sets[has] ^ (1 << b)
                cand = g[j, prev] + uncov[prev] + iso_tail[j]
                best[has] = np.minimum(best[has], cand)
            g[j, sets] = best

    # walk back from the full state; prefer larger ids last so smaller ones come first
    sequence: List[int] = []
    mask, j = size - 1, big_j
    while mask or j:
        target = g[j, mask]
        step = None
        for b in range(k - 1, -1, -1):
            if not (mask >> b) & 1:
                continue
            prev = mask ^ (1 << b)
            if g[j, prev] + uncov[prev] + iso_tail[j] == target:
                step = ("core", b)
                break
        if step is None and j > 0 and g[j - 1, mask] + uncov[mask] + iso_tail[j - 1] == target:
            step = ("iso", j - 1)
        if step is None:
            raise RuntimeError("Exact ordering table is inconsistent at state %i/%i" % (mask, j))
        if step[0] == "core":
            sequence.append(core[step[1]])
            mask ^= 1 << step[1]
        else:
            sequence.append(isolated[step[1]])
            j -= 1
    sequence.reverse()
    return Ordering.of(inst, (inst.vertices[i] for i in sequence))


# --- padding -----------------------------------------------------------------------------------


def pad_to_uniform(inst: MsscInstance, c: int) -> MsscInstance:
    """Fill every hyperedge up to ``c`` members with fresh dummy vertices."""
    if c < 1 or c < inst.c:
        raise BadUniformity("Cannot pad to %i: largest hyperedge has %i vertices" % (c, inst.c))
    if all(len(h.members) == c for h in inst.hyperedges):
        return inst
    taken = set(inst.vertices)
    counter = 0
    dummies: List[str] = []
    hyperedges = []
    for h in inst.hyperedges:
        members = list(h.members)
        while len(members) < c:
            counter += 1
            name = "%s%i" % (DUMMY_PREFIX, counter)
            if name in taken:
                continue
            taken.add(name)
            dummies.append(name)
            members.append(name)
        hyperedges.append((tuple(members), h.weight, h.labels))
    return MsscInstance.build(
        list(inst.vertices) + dummies,
        hyperedges,
        dummies=set(inst.dummies) | set(dummies),
        uncovered=inst.uncovered,
    )


def strip_dummies(ordering: Ordering, padded: MsscInstance) -> Ordering:
    """Remove dummies from an ordering of ``padded`` without delaying any edge.

    A dummy belongs to a single hyperedge; it trades places with the next
    real member of that hyperedge until none follows, then it is dropped.
    """
    if not padded.dummies:
        return ordering
    owner: Dict[str, frozenset] = {}
    for h in padded.hyperedges:
        for v in h.members:
            if v in padded.dummies:
                owner[v] = frozenset(h.members)
    seq = list(ordering.sequence)
    i = 0
    while i < len(seq):
        v = seq[i]
        if v in padded.dummies:
            mates = owner.get(v, frozenset())
            later = next(
                (
                    k
                    for k in range(i + 1, len(seq))
                    if seq[k] in mates and seq[k] not in padded.dummies
                ),
                None,
            )
            if later is not None:
                seq[i], seq[later] = seq[later], seq[i]
                continue
        i += 1
    real = padded.without_dummies()
    return Ordering.of(real, (v for v in seq if v not in padded.dummies))


# --- alpha points ------------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaSamples:
    """Every sampled ordering with its objective on the real instance."""

    orderings: Tuple[Ordering, ...]
    objectives: np.ndarray
    horizon: int
    capped: bool

    @property
    def best(self) -> Ordering:
        # argmin keeps the first minimum: lowest sub-seed wins ties
        return self.orderings[int(np.argmin(self.objectives))]


def smoothed_mass(x: np.ndarray, kernel: Any) -> Tuple[np.ndarray, bool]:
    """Cumulative kernel-smoothed mass of each vertex over time.

    The horizon grows until every vertex has accumulated at least one unit,
    up to eight times the number of vertices.
    """
    n, slots = x.shape
    cap = max(8 * n, slots)
    k = kernel.matrix(cap, slots)
    cumulative = np.cumsum(np.clip(x, 0.0, None) @ k.T, axis=1)
    done = np.all(cumulative >= 1.0 - 1e-9, axis=0)
    if done.any():
        return cumulative[:, : int(np.argmax(done)) + 1], False
    return cumulative, True


def sample_alpha_points(
    inst: MsscInstance,
    x: np.ndarray,
    kernel: Any,
    seed: int = 0,
    samples: int = 1,
    strict: bool = False,
) -> AlphaSamples:
    """Draw α-point orderings from the fractional schedule ``x`` (n × H).

    Sample ``i`` uses the sub-seed ``(seed, i)`` for its thresholds and
    tie-breaks. Vertices whose smoothed mass never reaches their threshold
    go last, heaviest mass first, unless ``strict`` is set.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if inst.n == 0:
        raise EmptyInstance("Instance has no vertices")
    x = np.asarray(x, dtype=float)
    if x.shape[0] != inst.n:
        raise ValueError("Schedule has %i rows for %i vertices" % (x.shape[0], inst.n))
    mass, capped = smoothed_mass(x, kernel)
    horizon = mass.shape[1]
    if capped:
        get_logger().warning("Rounding horizon capped at %i slots", horizon)

    alphas = np.empty((samples, inst.n))
    ties = np.empty((samples, inst.n))
    for i in range(samples):
        rng = sub_rng(seed, i)
        alphas[i] = rng.random(inst.n)
        ties[i] = rng.random(inst.n)

    tau = np.empty((samples, inst.n), dtype=np.int64)
    for v in range(inst.n):
        tau[:, v] = np.searchsorted(mass[v], alphas[:, v], side="left")
    never = tau >= horizon
    if strict and never.any():
        s, v = np.argwhere(never)[0]
        raise HorizonExhausted(
            "Vertex %r never reaches its threshold in sample %i" % (inst.vertices[v], s)
        )
    late = np.where(never, -mass[:, -1][None, :], 0.0)

    members = inst.member_indices()
    weights = inst.weights()
    real = inst.without_dummies() if inst.dummies else inst
    orderings = []
    objectives = np.empty(samples)
    for i in range(samples):
        order = np.lexsort((ties[i], late[i], tau[i]))
        seq = [inst.vertices[v] for v in order]
        if inst.dummies:
            ordering = strip_dummies(Ordering.of(inst, seq), inst)
        else:
            ranks = np.empty(inst.n, dtype=np.int64)
            ranks[order] = np.arange(1, inst.n + 1)
            times = tuple(int(ranks[idx].min()) for idx in members)
            ordering = Ordering(
                sequence=tuple(seq),
                cover_times=times,
                objective=math.fsum(weights * np.array(times, dtype=float)),
                total_weight=real.total_weight,
            )
        orderings.append(ordering)
        objectives[i] = ordering.objective
    return AlphaSamples(
        orderings=tuple(orderings), objectives=objectives, horizon=horizon, capped=capped
    )


def alpha_point_round(
    inst: MsscInstance,
    lp: Any,
    kernel: Any,
    seed: int = 0,
    samples: int = 1,
    strict: bool = False,
) -> Ordering:
    """Best of ``samples`` α-point roundings of the LP solution ``lp``.

    ``lp`` is the :class:`~radial_restore.lp.LpSolution` of the model built on
    ``inst``. When ``inst`` is padded the result orders the real vertices.
    """
    x = getattr(lp, "x", lp)
    if x is None:
        raise ValueError("LP solution carries no schedule")
    return sample_alpha_points(inst, x, kernel, seed=seed, samples=samples, strict=strict).best


# --- text format -------------------------------------------------------------------------------


def format_hypergraph(inst: MsscInstance) -> str:
    out = io.StringIO()
    out.write("# radial_restore %s hypergraph\n" % __version__)
    out.write("# vertices: %s\n" % " ".join(inst.vertices))
    if inst.dummies:
        out.write("# dummies: %s\n" % " ".join(natural_sorted(inst.dummies)))
    for h in inst.hyperedges:
        for v in h.members:
            if not v or any(ch.isspace() for ch in v):
                raise ValueError("Vertex id %r cannot be written in the text format" % v)
        out.write("%s %s\n" % (format(h.weight, ".17g"), " ".join(h.members)))
    return out.getvalue()


def write_hypergraph(path: str, inst: MsscInstance) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_hypergraph(inst))


def parse_hypergraph(text: str, path: str = "") -> MsscInstance:
    vertices: List[str] = []
    dummies: List[str] = []
    hyperedges = []
    for row, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("vertices:"):
                vertices.extend(body[len("vertices:") :].split())
            elif body.startswith("dummies:"):
                dummies.extend(body[len("dummies:") :].split())
            continue
        fields = line.split()
        try:
            weight = float(fields[0])
        except ValueError:
            raise ParseError("weight %r is not a number" % fields[0], path, row, "weight")
        if not (math.isfinite(weight) and weight >= 0):
            raise ParseError("weight %r must be nonnegative" % fields[0], path, row, "weight")
        if len(fields) < 2:
            raise ParseError("hyperedge has no vertices", path, row, "vertices")
        hyperedges.append((tuple(fields[1:]), weight))
        vertices.extend(fields[1:])
    return MsscInstance.build(vertices, hyperedges, dummies=dummies)


def read_hypergraph(path: str) -> MsscInstance:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ParseError(e.strerror or str(e), path)
    return parse_hypergraph(text, path)


def evaluate(inst: MsscInstance, sequence: Sequence[str]) -> float:
    """Objective of ``sequence`` on ``inst``."""
    return Ordering.of(inst, sequence).objective
