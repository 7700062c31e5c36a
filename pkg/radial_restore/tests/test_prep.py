"""Tests for ingestion, contraction and switch placement"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import os

import pytest

from radial_restore.errors import DuplicateEdge
from radial_restore.errors import MissingCoordinates
from radial_restore.errors import MissingRoot
from radial_restore.errors import ParseError
from radial_restore.gen import gen_greedy_gap_example
from radial_restore.gen import gen_sample_network
from radial_restore.netgraph import build_tree_config
from radial_restore.netgraph import compute_coverage
from radial_restore.netgraph import Edge
from radial_restore.netgraph import evaluate_metrics
from radial_restore.netgraph import Network
from radial_restore.netgraph import Vertex
from radial_restore.prep import candidate_switches
from radial_restore.prep import contract_tree
from radial_restore.prep import greedy_add_switches
from radial_restore.prep import ingest_csv

pjoin = os.path.join

BUSES = """bus_id,x,y,demand_kw,voltage_class,is_root
r,0,0,0,MV,1
a,100,0,5,LV,0
b,200,0,5,lv,0
"""

LINES = """line_id,from_bus,to_bus,status,resistance
ra,r,a,tree,0.01
ab,a,b,tree,0.01
rb,r,b,switch,0.02
"""


def _write(tmp_path, buses=BUSES, lines=LINES):
    bus_path, line_path = pjoin(str(tmp_path), "buses.csv"), pjoin(str(tmp_path), "lines.csv")
    with open(bus_path, "w") as f:
        f.write(buses)
    with open(line_path, "w") as f:
        f.write(lines)
    return bus_path, line_path


@pytest.fixture(scope="module")
def sample():
    net = gen_sample_network()
    return net, build_tree_config(net, net.default_tree)


def test_ingest_small(tmp_path):
    net = ingest_csv(*_write(tmp_path))
    assert net.root == "r"
    assert net.default_tree == {"ra", "ab"}
    assert net.edges["rb"].weight == pytest.approx(200.0)
    assert net.edges["rb"].resistance == 0.02
    assert net.vertices["b"].voltage_class == "LV"
    assert net.vertices["a"].demand == 5.0


@pytest.mark.parametrize(
    "buses, lines, column",
    [
        (BUSES.replace("demand_kw", "load"), LINES, "demand_kw"),
        (BUSES.replace("100,0,5", "100,0,five"), LINES, "demand_kw"),
        (BUSES.replace("100,0,5", "100,0,-5"), LINES, "demand_kw"),
        (BUSES.replace("MV,1", "HV,1"), LINES, "voltage_class"),
        (BUSES.replace("LV,0\nb", "LV,maybe\nb"), LINES, "is_root"),
        (BUSES, LINES.replace("a,b,tree", "a,c,tree"), "to_bus"),
        (BUSES, LINES.replace("r,b,switch", "r,b,open"), "status"),
        (BUSES, LINES.replace("0.02", "-1"), "resistance"),
    ],
)
def test_ingest_errors(tmp_path, buses, lines, column):
    with pytest.raises(ParseError) as info:
        ingest_csv(*_write(tmp_path, buses, lines))
    assert info.value.column == column
    assert info.value.path.endswith(".csv")


def test_ingest_structural_errors(tmp_path):
    with pytest.raises(MissingRoot):
        ingest_csv(*_write(tmp_path, BUSES.replace("MV,1", "MV,0")))
    with pytest.raises(ParseError):
        ingest_csv(*_write(tmp_path, BUSES.replace("LV,0\nb", "LV,1\nb")))
    with pytest.raises(DuplicateEdge):
        ingest_csv(*_write(tmp_path, lines=LINES.replace("rb,", "ra,")))
    with pytest.raises(MissingCoordinates):
        ingest_csv(*_write(tmp_path, BUSES.replace("200,0,5", ",,5")))
    with pytest.raises(ParseError):
        ingest_csv(pjoin(str(tmp_path), "nope.csv"), pjoin(str(tmp_path), "nope.csv"))


def test_sample_network(sample):
    net, tree = sample
    assert len(net.vertices) == 200
    assert len(net.edges) == 202
    assert net.root == "b0"
    assert net.switch_ids(tree.edges) == ["sw1", "sw2", "sw3"]
    assert net.total_demand() == pytest.approx(2046.0)
    assert net.edges["lat3_1"].weight == pytest.approx(100.0)
    assert tree.flow["tr1"] == pytest.approx(2046.0)


def test_contract_sample(sample):
    net, tree = sample
    contracted, new_tree, mapping = contract_tree(net, tree, 10.0)
    assert len(contracted.vertices) == 36
    assert len(new_tree.edges) == 35
    assert contracted.switch_ids(new_tree.edges) == ["sw1", "sw2", "sw3"]
    assert mapping.dropped_switches == ()
    assert contracted.total_demand(include_root=True) == pytest.approx(net.total_demand(True))
    for v in contracted.vertices:
        if v == new_tree.root:
            continue
        kids = new_tree.children[v]
        assert len(kids) != 1
        assert kids or contracted.vertices[v].demand >= 10.0

    assert mapping.vertex_map["s9"] == "t9"
    assert mapping.vertex_map["t18"] == "t17"
    assert mapping.vertex_map["l3_10"] == "l3_10"
    assert mapping.edge_provenance["lat3_1"] == tuple("lat3_%i" % j for j in range(1, 11))
    assert contracted.edges["lat3_1"].weight == pytest.approx(1000.0)
    assert contracted.edges["lat3_1"].resistance == pytest.approx(0.1)
    assert contracted.edges["tr18"].weight == pytest.approx(1100.0)
    # s9 (2 kW) lands on t9, which holds 44 kW plus at most 1 kW handed down by lat9
    assert 100.0 + 200.0 / 47.0 <= contracted.edges["tr9"].weight <= 100.0 + 200.0 / 46.0
    rules = {step["rule"] for step in mapping.steps}
    assert rules == {"leaf", "series"}

    before = evaluate_metrics(net, tree, ["sw1", "sw2", "sw3"])
    after = evaluate_metrics(contracted, new_tree, ["sw1", "sw2", "sw3"])
    assert after.saidi == pytest.approx(before.saidi, rel=0.1)


def test_contract_weight_update_order(sample):
    net, tree = sample
    late, _, _ = contract_tree(net, tree, 10.0)
    early, _, mapping = contract_tree(net, tree, 10.0, pre_update_weight=True)
    assert early.edges["tr9"].weight <= 100.0 + 200.0 / 44.0
    assert early.edges["tr9"].weight > late.edges["tr9"].weight
    assert mapping.to_dict()["pre_update_weight"] is True


def test_contract_threshold_zero(sample):
    net, tree = sample
    contracted, _, mapping = contract_tree(net, tree, 0.0)
    assert "s9" in contracted.vertices
    assert all(step["rule"] == "series" for step in mapping.steps)
    with pytest.raises(ValueError):
        contract_tree(net, tree, -1.0)


def test_contract_drops_merged_switch():
    net = Network(
        vertices={
            "r": Vertex("r"),
            "a": Vertex("a", demand=50.0),
            "b": Vertex("b", demand=1.0),
        },
        edges={
            "r-a": Edge("r-a", "r", "a", 1.0, 0.1),
            "a-b": Edge("a-b", "a", "b", 1.0, 0.1),
            "r-b": Edge("r-b", "r", "b", 1.0, 0.1),
        },
        root="r",
    )
    contracted, tree, mapping = contract_tree(net, build_tree_config(net, ["r-a", "a-b"]), 5.0)
    assert mapping.dropped_switches == ("r-b",)
    assert set(contracted.vertices) == {"r", "a"}
    assert contracted.vertices["a"].demand == 51.0
    assert tree.edges == {"r-a"}


def test_candidates():
    net, _ = gen_greedy_gap_example()
    assert [(c.u, c.v) for c in candidate_switches(net, 2.1)] == [("v2", "v4")]
    found = candidate_switches(net, 3.0)
    assert [(c.u, c.v) for c in found] == [("v2", "v4"), ("v1", "v4"), ("v2", "v3")]
    assert found[1].length == pytest.approx(5 ** 0.5)
    assert len(candidate_switches(net, 3.0, cap=1)) == 1
    assert candidate_switches(net, 0.0) == []

    bare = Network(
        vertices={"r": Vertex("r", x=0.0, y=0.0), "a": Vertex("a")},
        edges={"r-a": Edge("r-a", "r", "a")},
        root="r",
    )
    with pytest.raises(MissingCoordinates):
        candidate_switches(bare, 10.0)


def test_add_switches_on_sample(sample):
    net, tree = sample
    contracted, new_tree, _ = contract_tree(net, tree, 10.0)
    candidates = candidate_switches(contracted, 1000.0)
    assert all(c.length < 1000.0 for c in candidates)
    plan = greedy_add_switches(contracted, new_tree, candidates, 20, target=0.9)
    assert plan.initial_fraction < 0.5
    assert plan.covered_fraction >= 0.9
    assert 0 < len(plan.added) <= 20
    curve = plan.coverage_curve
    assert all(b >= a for a, b in zip(curve, curve[1:]))
    assert plan.added[0].id == "new1"
    rows = plan.curve_rows()
    assert rows[0]["step"] == 0 and rows[-1]["switch"] == plan.added[-1].id

    bigger = plan.apply(contracted)
    switches = bigger.switch_ids(new_tree.edges)
    report = evaluate_metrics(bigger, new_tree, switches)
    assert 1 - report.uncovered_exposure == pytest.approx(plan.covered_fraction)
    assert bigger.edges["new1"].weight == pytest.approx(plan.added[0].length)


def test_add_switches_stops_at_target(sample):
    net, tree = sample
    candidates = candidate_switches(net, 500.0, cap=50)
    plan = greedy_add_switches(net, tree, candidates, 5, target=0.0)
    assert plan.added == ()
    assert plan.covered_fraction == plan.initial_fraction
    with pytest.raises(ValueError):
        greedy_add_switches(net, tree, candidates, 0)
    cov = compute_coverage(net, tree)
    assert cov.uncovered
