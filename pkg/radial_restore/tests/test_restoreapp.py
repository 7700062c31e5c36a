"""Tests for the radial-restore command line"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import json
import os

import pandas as pd
import pytest

from .utils import run_app
from radial_restore.netfile import read_network_file
from radial_restore.utils import data_file

pjoin = os.path.join


def _json(path):
    with open(path) as f:
        return json.load(f)


def _error(p):
    return json.loads(p.stderr.strip().splitlines()[-1])


@pytest.fixture
def wheel_file(workdir):
    out = pjoin(workdir, "wheel")
    p = run_app("gen", "wheel", "--wheel-size=7", "--output-dir=%s" % out)
    assert p.returncode == 0, p.stderr
    path = p.stdout.strip()
    assert path == pjoin(out, "network.json")
    return path


class TestUsage:
    def test_no_subcommand(self):
        p = run_app()
        assert p.returncode == 2
        assert "No subcommand specified" in p.stdout

    def test_unknown_subcommand(self):
        p = run_app("frobnicate")
        assert p.returncode == 2
        assert "Unknown subcommand 'frobnicate'" in p.stdout

    @pytest.mark.parametrize("args", [("gen",), ("gen", "lattice")])
    def test_bad_family(self, args):
        p = run_app(*args)
        assert p.returncode == 2
        assert "Must be one of" in p.stderr

    def test_missing_network(self, workdir):
        p = run_app("order", "--output-dir=%s" % workdir)
        assert p.returncode == 2
        assert "A network is required" in p.stderr

    def test_bad_setting(self, wheel_file, workdir):
        p = run_app("order", "--network=%s" % wheel_file, "--metric=energy")
        assert p.returncode == 2
        assert "Bad configuration" in p.stderr

    def test_bad_env_setting(self, wheel_file, monkeypatch):
        monkeypatch.setenv("RADIAL_RESTORE_SAMPLES", "none")
        p = run_app("order", "--network=%s" % wheel_file)
        assert p.returncode == 2

    def test_unreadable_input(self, workdir):
        p = run_app("order", "--network=%s" % pjoin(workdir, "missing.json"))
        assert p.returncode == 1
        err = _error(p)
        assert err["error"] == "ParseError"
        assert err["path"].endswith("missing.json")

    def test_unknown_solver(self, wheel_file, workdir):
        p = run_app("order", "--network=%s" % wheel_file, "--solver=annealing")
        assert p.returncode == 1
        assert _error(p)["error"] == "NoSuchSolver"

    def test_generate_config(self):
        p = run_app("order", "--generate-config")
        assert p.returncode == 0, p.stderr
        path = pjoin(os.environ["JUPYTER_CONFIG_DIR"], "radial_restore_config.py")
        with open(path) as f:
            text = f.read()
        assert "RunConfig" in text
        assert "AlphaPointSolver" in text


def test_solvers_listing():
    p = run_app("solvers")
    assert p.returncode == 0, p.stderr
    lines = p.stdout.splitlines()
    assert lines[0] == "Available ordering solvers:"
    assert any(line.strip().startswith("greedy") and "(default)" in line for line in lines)
    assert any(line.strip().startswith("alpha") for line in lines)


def test_wheel_pipeline(wheel_file, workdir):
    p = run_app("validate", "--network=%s" % wheel_file)
    assert p.returncode == 0, p.stderr
    summary = json.loads(p.stdout)
    assert summary["kind"] == "network"
    assert (summary["vertices"], summary["edges"]) == (7, 12)
    assert (summary["tree_edges"], summary["switches"]) == (6, 6)

    values = {}
    for solver in ("greedy", "exact"):
        out = pjoin(workdir, solver)
        p = run_app(
            "order", "--network=%s" % wheel_file, "--solver=%s" % solver, "--output-dir=%s" % out
        )
        assert p.returncode == 0, p.stderr
        values[solver] = float(p.stdout)
        doc = _json(pjoin(out, "solution.json"))
        assert doc["config"]["subcommand"] == "order"
        assert doc["config"]["run"]["solver"] == solver
        assert doc["solver"]["name"] == solver
        assert len(doc["ordering"]["sequence"]) == 6
        assert set(doc["metrics"]) >= {"r_time", "saidi", "energy"}
    assert values["exact"] <= values["greedy"] + 1e-9

    solution = pjoin(workdir, "exact", "solution.json")
    out = pjoin(workdir, "report")
    p = run_app(
        "report", "--network=%s" % wheel_file, "--solution=%s" % solution, "--output-dir=%s" % out
    )
    assert p.returncode == 0, p.stderr
    summary = json.loads(p.stdout)
    assert summary["r_time"] == pytest.approx(_json(solution)["metrics"]["r_time"])
    with open(pjoin(out, "report.csv")) as f:
        assert f.readline().startswith("# radial_restore ")
    table = pd.read_csv(pjoin(out, "report.csv"), comment="#")
    assert list(table.columns) == ["vertex", "voltage_class", "demand_kw", "expected_outage"]
    assert len(table) == 7
    assert table.set_index("vertex").loc["hub", "expected_outage"] == 0


def test_local_search_on_wheel(wheel_file, workdir):
    out = pjoin(workdir, "search")
    p = run_app(
        "local-search",
        "--network=%s" % wheel_file,
        "--objective=energy",
        "--output-dir=%s" % out,
    )
    assert p.returncode == 0, p.stderr
    assert float(p.stdout) == pytest.approx(6.0)
    doc = _json(pjoin(out, "solution.json"))
    assert doc["tree_edges"] == ["spoke%i" % i for i in range(1, 7)]
    net, _ = read_network_file(pjoin(out, "network.json"))
    assert net.default_tree == frozenset(doc["tree_edges"])
    trace = pd.read_csv(pjoin(out, "curve.csv"), comment="#")
    assert trace["energy"].iloc[-1] == pytest.approx(6.0)


def test_env_selects_solver(wheel_file, workdir, monkeypatch):
    monkeypatch.setenv("RADIAL_RESTORE_SOLVER", "exact")
    p = run_app("order", "--network=%s" % wheel_file, "--output-dir=%s" % workdir)
    assert p.returncode == 0, p.stderr
    assert _json(pjoin(workdir, "solution.json"))["solver"]["name"] == "exact"


def test_alpha_order_is_reproducible(workdir):
    gap_dir = pjoin(workdir, "gap")
    p = run_app("gen", "integrality-gap", "--gap-n=6", "--gap-k=1", "--output-dir=%s" % gap_dir)
    assert p.returncode == 0, p.stderr
    hypergraph = p.stdout.strip()
    assert _json(pjoin(gap_dir, "gap.json"))["blocks"] == [6]

    docs = []
    for run in ("a", "b"):
        out = pjoin(workdir, run)
        p = run_app(
            "order",
            "--hypergraph=%s" % hypergraph,
            "--solver=alpha",
            "--samples=4",
            "--seed=3",
            "--dump-lp",
            "--output-dir=%s" % out,
        )
        assert p.returncode == 0, p.stderr
        assert os.path.isfile(pjoin(out, "model.lp"))
        doc = _json(pjoin(out, "solution.json"))
        del doc["config"]
        docs.append(doc)
    assert docs[0] == docs[1]
    assert docs[0]["kernel"]["kind"] == "power-law"
    assert docs[0]["instance"]["m"] == 20


def test_sample_pipeline(workdir):
    ingest = pjoin(workdir, "ingest")
    p = run_app(
        "ingest",
        "--buses=%s" % data_file("sample", "buses.csv"),
        "--lines=%s" % data_file("sample", "lines.csv"),
        "--output-dir=%s" % ingest,
    )
    assert p.returncode == 0, p.stderr
    network = p.stdout.strip()

    contract = pjoin(workdir, "contract")
    p = run_app(
        "contract", "--network=%s" % network, "--threshold-kw=10", "--output-dir=%s" % contract
    )
    assert p.returncode == 0, p.stderr
    summary = json.loads(p.stdout)
    assert (summary["vertices_before"], summary["vertices_after"]) == (200, 36)
    assert summary["demand_after"] == pytest.approx(summary["demand_before"])
    mapping = _json(pjoin(contract, "contraction.json"))["contraction"]
    assert mapping["vertex_map"]["s9"] == "t9"

    placed = pjoin(workdir, "placed")
    p = run_app(
        "add-switches",
        "--network=%s" % pjoin(contract, "network.json"),
        "--max-length-m=1000",
        "--max-switches=20",
        "--output-dir=%s" % placed,
    )
    assert p.returncode == 0, p.stderr
    summary = json.loads(p.stdout)
    assert summary["covered_fraction"] >= 0.9
    curve = pd.read_csv(pjoin(placed, "curve.csv"), comment="#")
    assert len(curve) == summary["added"] + 1
    assert curve["covered_fraction"].is_monotonic_increasing
