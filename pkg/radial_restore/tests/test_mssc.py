"""Tests for Min Sum Set Cover instances and orderings"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import itertools

import numpy as np
import pytest

from .utils import brute_force_order
from .utils import random_instance
from radial_restore.errors import BadUniformity
from radial_restore.errors import EmptyInstance
from radial_restore.errors import HorizonExhausted
from radial_restore.errors import NotAPermutation
from radial_restore.errors import ParseError
from radial_restore.errors import TooLarge
from radial_restore.gen import gen_greedy_gap_example
from radial_restore.gen import gen_mssc_non_mrt_fixture
from radial_restore.kernelspec import KernelSpec
from radial_restore.lp import build_mssc_lp
from radial_restore.lp import solve_lp
from radial_restore.mssc import alpha_point_round
from radial_restore.mssc import evaluate
from radial_restore.mssc import exact_order_dp
from radial_restore.mssc import format_hypergraph
from radial_restore.mssc import greedy_order
from radial_restore.mssc import Hyperedge
from radial_restore.mssc import instance_from_coverage
from radial_restore.mssc import MsscInstance
from radial_restore.mssc import Ordering
from radial_restore.mssc import pad_to_uniform
from radial_restore.mssc import parse_hypergraph
from radial_restore.mssc import read_hypergraph
from radial_restore.mssc import sample_alpha_points
from radial_restore.mssc import strip_dummies
from radial_restore.mssc import write_hypergraph
from radial_restore.netgraph import compute_coverage
from radial_restore.utils import sub_rng


@pytest.fixture
def gap_instance():
    net, tree = gen_greedy_gap_example()
    cov = compute_coverage(net, tree)
    return instance_from_coverage(cov, {e: 1.0 for e in tree.edges})


def test_instance_from_coverage(gap_instance):
    inst = gap_instance
    assert inst.vertices == ("s1", "s2", "s3")
    members = sorted(h.members for h in inst.hyperedges)
    assert members == [("s1", "s2"), ("s1", "s3"), ("s2",), ("s3",)]
    assert inst.c == 2
    assert inst.total_weight == 4.0
    labels = {h.members: h.labels for h in inst.hyperedges}
    assert labels[("s2",)] == ("v1-v2",)


def test_merge_and_uncovered():
    inst = MsscInstance.build(
        ["a", "b"],
        [(("a",), 1.0, ("e1",)), (("a",), 1.0, ("e2",)), (("b", "a"), 0.5)],
        uncovered=["e3"],
    )
    assert inst.m == 2
    merged = [h for h in inst.hyperedges if h.members == ("a",)][0]
    assert merged.weight == 2.0
    assert merged.labels == ("e1", "e2")
    assert inst.uncovered == ("e3",)
    with pytest.raises(ValueError):
        MsscInstance(("a",), (Hyperedge(("a",)), Hyperedge(("a",))))
    with pytest.raises(ValueError):
        MsscInstance.build(["a"], [(("a",), -1.0)])
    with pytest.raises(ValueError):
        MsscInstance.build(["a"], [(("b",), 1.0)])


@pytest.mark.parametrize("seed", range(5))
def test_merging_keeps_objectives(seed):
    inst = random_instance(seed, n=5, m=6, c=2)
    doubled = MsscInstance.build(
        inst.vertices,
        [(h.members, h.weight / 2) for h in inst.hyperedges] * 2,
    )
    assert doubled.m == inst.m
    for perm in itertools.islice(itertools.permutations(inst.vertices), 30):
        assert evaluate(doubled, perm) == pytest.approx(evaluate(inst, perm))


def test_ordering_of():
    inst = MsscInstance.build(["a", "b", "c"], [(("a", "c"), 2.0), (("b",), 1.0)])
    ordering = Ordering.of(inst, ["c", "b", "a"])
    assert ordering.cover_times == (1, 2)
    assert ordering.objective == 4.0
    assert ordering.normalized == pytest.approx(4 / 3)
    assert ordering.rank == {"c": 1, "b": 2, "a": 3}
    with pytest.raises(NotAPermutation):
        Ordering.of(inst, ["a", "b"])
    with pytest.raises(NotAPermutation):
        Ordering.of(inst, ["a", "b", "b"])


def test_greedy_gap(gap_instance):
    greedy = greedy_order(gap_instance)
    assert greedy.sequence == ("s1", "s2", "s3")
    assert greedy.normalized == pytest.approx(7 / 4)
    best = exact_order_dp(gap_instance)
    assert best.sequence == ("s2", "s3", "s1")
    assert best.objective == pytest.approx(6.0)
    assert best.normalized == pytest.approx(3 / 2)


def test_greedy_small_cases():
    single = MsscInstance.build(["a"], [(("a",), 2.5)])
    assert greedy_order(single).sequence == ("a",)
    assert greedy_order(single).objective == 2.5

    disjoint = MsscInstance.build(["c", "a", "b"], [(("a",), 1.0), (("b",), 3.0), (("c",), 2.0)])
    ordering = greedy_order(disjoint)
    assert ordering.sequence == ("b", "c", "a")
    assert ordering.objective == 10.0
    assert exact_order_dp(disjoint).objective == 10.0

    with pytest.raises(EmptyInstance):
        greedy_order(MsscInstance.build([], []))
    with pytest.raises(ValueError):
        greedy_order(single, tie_rule="alphabetical")


def test_greedy_random_ties_are_seeded():
    # six interchangeable vertices
    inst = MsscInstance.build(
        ["v%i" % i for i in range(6)], [(("v%i" % i,), 1.0) for i in range(6)]
    )
    first = greedy_order(inst, tie_rule="random", seed=3)
    again = greedy_order(inst, tie_rule="random", seed=3)
    assert first.sequence == again.sequence
    sequences = {greedy_order(inst, tie_rule="random", seed=s).sequence for s in range(10)}
    assert len(sequences) > 1
    assert all(greedy_order(inst, tie_rule="random", seed=s).objective == 21.0 for s in range(3))


@pytest.mark.parametrize("seed", range(8))
def test_exact_matches_enumeration(seed):
    n = 8 if seed < 2 else 6
    inst = random_instance(seed, n=n, m=9, c=3)
    best, _ = brute_force_order(inst)
    exact = exact_order_dp(inst)
    assert exact.objective == pytest.approx(best)
    assert greedy_order(inst).objective >= exact.objective - 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_greedy_within_four_of_exact(seed):
    inst = random_instance(100 + seed, n=12, m=16, c=4, integer_weights=False)
    assert greedy_order(inst).objective <= 4 * exact_order_dp(inst).objective + 1e-9


def test_exact_with_isolated_vertices():
    inst = MsscInstance.build(
        ["a", "b", "c", "d", "e"],
        [(("a", "b"), 2.0), (("b", "c"), 1.0), (("d",), 5.0), (("e",), 0.5)],
    )
    best, _ = brute_force_order(inst)
    assert exact_order_dp(inst).objective == pytest.approx(best)


def test_exact_refuses_large_core():
    chain = ["v%i" % i for i in range(6)]
    inst = MsscInstance.build(chain, [((a, b), 1.0) for a, b in zip(chain, chain[1:])])
    with pytest.raises(TooLarge) as info:
        exact_order_dp(inst, limit=4)
    assert info.value.size == 6
    assert info.value.limit == 4
    with pytest.raises(EmptyInstance):
        exact_order_dp(MsscInstance.build([], []))


def test_exact_refuses_large_table():
    core = [(("a", "b"), 1.0), (("b", "c"), 1.0)]
    loners = ["z%i" % i for i in range(3)]
    inst = MsscInstance.build(["a", "b", "c"] + loners, core + [((v,), 1.0) for v in loners])
    with pytest.raises(TooLarge) as info:
        exact_order_dp(inst, limit=4)
    assert (info.value.size, info.value.limit) == (32, 16)
    assert exact_order_dp(inst, limit=5).objective == pytest.approx(brute_force_order(inst)[0])


def test_non_network_fixture():
    inst = gen_mssc_non_mrt_fixture()
    assert inst.c == 3
    exact = exact_order_dp(inst)
    assert exact.sequence == ("4", "1", "2", "3")
    assert exact.objective == 5.0
    assert greedy_order(inst).objective == 5.0
    assert brute_force_order(inst)[0] == 5.0


def test_pad_to_uniform():
    inst = MsscInstance.build(["a", "b", "c"], [(("a",), 1.0), (("a", "b", "c"), 2.0)])
    padded = pad_to_uniform(inst, 3)
    assert all(len(h.members) == 3 for h in padded.hyperedges)
    assert padded.dummies == {"_dummy1", "_dummy2"}
    assert ("_dummy1", "_dummy2", "a") in {h.members for h in padded.hyperedges}
    assert padded.without_dummies() == inst
    assert pad_to_uniform(padded, 3) is padded
    with pytest.raises(BadUniformity):
        pad_to_uniform(inst, 2)


@pytest.mark.parametrize("seed", range(6))
def test_strip_dummies_never_delays(seed):
    inst = random_instance(seed, n=6, m=7, c=3)
    padded = pad_to_uniform(inst, 4)
    rng = sub_rng(seed, 1)
    for _ in range(20):
        tau = [padded.vertices[i] for i in rng.permutation(padded.n)]
        stripped = strip_dummies(Ordering.of(padded, tau), padded)
        assert set(stripped.sequence) == set(inst.vertices)
        assert stripped.objective <= Ordering.of(padded, tau).objective + 1e-9


def test_alpha_single_vertex():
    inst = MsscInstance.build(["a"], [(("a",), 1.0)])
    x = np.ones((1, 1))
    for kind in ("harmonic", "msvc", "power-law"):
        drawn = sample_alpha_points(inst, x, KernelSpec(kind=kind, c=3), seed=1, samples=5)
        assert all(o.sequence == ("a",) for o in drawn.orderings)


@pytest.mark.parametrize("seed", range(4))
def test_alpha_on_integral_schedule(seed):
    inst = random_instance(seed, n=7, m=8, c=3)
    x = np.eye(inst.n)
    cost = evaluate(inst, inst.vertices)
    drawn = sample_alpha_points(inst, x, KernelSpec(kind="harmonic", c=3), seed=seed, samples=50)
    assert drawn.objectives.max() <= 4 * cost + 1e-9
    assert not drawn.capped


def test_alpha_samples_are_addressed_by_seed():
    inst = random_instance(5, n=6, m=8, c=3)
    x = np.full((inst.n, inst.n), 1.0 / inst.n)
    kernel = KernelSpec.for_uniformity(3)
    few = sample_alpha_points(inst, x, kernel, seed=9, samples=3)
    many = sample_alpha_points(inst, x, kernel, seed=9, samples=8)
    for a, b in zip(few.orderings, many.orderings):
        assert a.sequence == b.sequence
    assert many.best.objective <= few.best.objective
    assert many.best.objective == many.objectives.min()


def test_alpha_strict_horizon():
    inst = MsscInstance.build(["a", "b"], [(("a",), 1.0), (("b",), 1.0)])
    # b carries no mass at all
    x = np.array([[1.0, 1.0], [0.0, 0.0]])
    kernel = KernelSpec(kind="harmonic", c=2)
    drawn = sample_alpha_points(inst, x, kernel, samples=4)
    assert drawn.capped
    assert all(o.sequence == ("a", "b") for o in drawn.orderings)
    with pytest.raises(HorizonExhausted):
        sample_alpha_points(inst, x, kernel, samples=4, strict=True)
    with pytest.raises(ValueError):
        sample_alpha_points(inst, x, kernel, samples=0)


def _three_uniform(seed, n=9, m=10):
    rng = sub_rng(seed, 2)
    vertices = ["v%i" % i for i in range(1, n + 1)]
    triples = list(itertools.combinations(vertices, 3))
    picks = rng.choice(len(triples), size=m, replace=False)
    return MsscInstance.build(vertices, [(triples[int(i)], 1.0) for i in picks])


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100))
def test_alpha_mean_within_bound(seed):
    inst = _three_uniform(seed)
    lp = solve_lp(build_mssc_lp(inst))
    greedy = greedy_order(inst)
    assert greedy.objective <= 4 * lp.objective + 1e-9
    assert exact_order_dp(inst).objective <= greedy.objective + 1e-9
    kernel = KernelSpec.for_uniformity(3)
    drawn = sample_alpha_points(inst, lp.x, kernel, seed=seed, samples=500)
    assert drawn.objectives.mean() <= kernel.beta ** 2 * lp.objective + 1e-9
    assert drawn.objectives.min() >= lp.objective - 1e-7
    best = alpha_point_round(inst, lp, kernel, seed=seed, samples=500)
    assert best.objective == drawn.objectives.min()


def test_alpha_round_on_padded_instance():
    inst = random_instance(11, n=6, m=7, c=3)
    padded = pad_to_uniform(inst, inst.c)
    lp = solve_lp(build_mssc_lp(padded))
    ordering = alpha_point_round(padded, lp, KernelSpec.for_uniformity(inst.c), samples=10)
    assert set(ordering.sequence) == set(inst.vertices)
    assert ordering.objective == pytest.approx(evaluate(inst, ordering.sequence))


def test_hypergraph_text(tmp_path):
    inst = MsscInstance.build(
        ["s1", "s2", "s10"], [(("s1", "s10"), 0.1), (("s2",), 3.0)], dummies=["s10"]
    )
    text = format_hypergraph(inst)
    assert "# vertices: s1 s2 s10" in text
    assert "0.10000000000000001 s1 s10" in text
    path = str(tmp_path / "h.txt")
    write_hypergraph(path, inst)
    assert read_hypergraph(path) == inst

    # vertices outside every hyperedge come from the comment line
    lonely = parse_hypergraph("# vertices: a b\n1 a\n")
    assert lonely.vertices == ("a", "b")

    with pytest.raises(ParseError) as info:
        parse_hypergraph("1 a\nheavy b\n", "bad.txt")
    assert info.value.row == 2
    assert info.value.column == "weight"
    with pytest.raises(ParseError):
        parse_hypergraph("-1 a\n")
    with pytest.raises(ParseError):
        parse_hypergraph("2\n")
