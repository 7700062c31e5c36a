"""Testing utils for radial_restore tests

"""
import itertools
import math
import os
import sys
from subprocess import PIPE
from subprocess import run

import numpy as np

from radial_restore.mssc import MsscInstance
from radial_restore.netgraph import Edge
from radial_restore.netgraph import Network
from radial_restore.netgraph import Vertex
from radial_restore.utils import sub_rng


def run_app(*args, cwd=None):
    """Run ``radial-restore`` in a fresh interpreter; returns the completed process."""
    return run(
        [sys.executable, "-m", "radial_restore.restoreapp"] + list(args),
        stdout=PIPE,
        stderr=PIPE,
        cwd=cwd,
        env=os.environ.copy(),
        universal_newlines=True,
        timeout=240,
    )


def brute_force_order(inst: MsscInstance):
    """(objective, sequence) of the best ordering over all permutations."""
    best = None
    for perm in itertools.permutations(inst.vertices):
        rank = {v: i + 1 for i, v in enumerate(perm)}
        cost = math.fsum(h.weight * min(rank[v] for v in h.members) for h in inst.hyperedges)
        if best is None or cost < best[0] - 1e-12:
            best = (cost, perm)
    return best


def random_instance(seed, n=6, m=8, c=3, integer_weights=True):
    """A random hypergraph with hyperedges of 1..c vertices."""
    rng = sub_rng(seed, 7)
    vertices = ["v%i" % i for i in range(1, n + 1)]
    hyperedges = []
    for _ in range(m):
        size = int(rng.integers(1, c + 1))
        members = tuple(str(v) for v in rng.choice(vertices, size=size, replace=False))
        weight = float(rng.integers(1, 6)) if integer_weights else float(rng.random())
        hyperedges.append((members, weight))
    return MsscInstance.build(vertices, hyperedges)


def random_network(seed, n=7, extra=4):
    """A random connected network: a random spanning tree plus a few switches.

    Returns (network, tree edge ids).
    """
    rng = np.random.default_rng(seed)
    tree_pairs = sorted((int(rng.integers(i)), i) for i in range(1, n))
    others = [p for p in itertools.combinations(range(n), 2) if p not in set(tree_pairs)]
    picks = rng.choice(len(others), size=min(extra, len(others)), replace=False)
    vertices = {
        "b%i" % i: Vertex("b%i" % i, demand=float(rng.integers(0, 5)), x=float(i), y=0.0)
        for i in range(n)
    }
    edges = {}
    tree = []
    for k, (a, b) in enumerate(tree_pairs, 1):
        eid = "t%i" % k
        edges[eid] = Edge(eid, "b%i" % a, "b%i" % b, float(rng.integers(1, 4)), 1.0)
        tree.append(eid)
    for k, idx in enumerate(sorted(picks), 1):
        a, b = others[int(idx)]
        eid = "s%i" % k
        edges[eid] = Edge(eid, "b%i" % a, "b%i" % b, 1.0, 1.0)
    net = Network(vertices=vertices, edges=edges, root="b0", default_tree=frozenset(tree))
    return net, tree
