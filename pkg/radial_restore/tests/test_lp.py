"""Tests for the MSSC LP relaxation and the simplex solver"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import numpy as np
import pytest
from scipy.optimize import linprog

from .utils import random_instance
from radial_restore.errors import EmptyInstance
from radial_restore.errors import Infeasible
from radial_restore.errors import InfeasibleHorizon
from radial_restore.errors import IterationLimit
from radial_restore.errors import Unbounded
from radial_restore.gen import gen_greedy_gap_example
from radial_restore.gen import gen_integrality_gap
from radial_restore.gen import GapFamilyParams
from radial_restore.lp import build_mssc_lp
from radial_restore.lp import check_feasibility
from radial_restore.lp import check_horizon
from radial_restore.lp import format_lp
from radial_restore.lp import LpModel
from radial_restore.lp import mssc_point_cost
from radial_restore.lp import SimplexSolver
from radial_restore.lp import solve_lp
from radial_restore.lp import STATUS_INFEASIBLE
from radial_restore.lp import STATUS_OPTIMAL
from radial_restore.lp import STATUS_UNBOUNDED
from radial_restore.lp import write_lp_file
from radial_restore.mssc import exact_order_dp
from radial_restore.mssc import instance_from_coverage
from radial_restore.mssc import MsscInstance
from radial_restore.netgraph import compute_coverage


def test_single_hyperedge():
    inst = MsscInstance.build(["a"], [(("a",), 1.0)])
    model = build_mssc_lp(inst, 1)
    assert model.shape == (3, 2)
    sol = solve_lp(model)
    assert sol.status == STATUS_OPTIMAL
    assert sol.objective == pytest.approx(1.0)
    assert sol.x[0, 0] == pytest.approx(1.0)
    assert sol.u[0, 0] == pytest.approx(1.0)


def test_two_singletons():
    inst = MsscInstance.build(["a", "b"], [(("a",), 1.0), (("b",), 1.0)])
    sol = solve_lp(build_mssc_lp(inst, 2))
    assert sol.objective == pytest.approx(3.0)


def test_model_dimensions():
    inst = random_instance(1, n=5, m=6, c=3)
    model = build_mssc_lp(inst, 4)
    n, m, h = inst.n, inst.m, 4
    assert model.shape == (m * h + m + h, n * h + m * h)
    assert model.names[model.layout.x_index(0, 1)] == "x_0_1"
    assert model.names[model.layout.u_index(m - 1, h)] == "u_%i_%i" % (m - 1, h)
    assert model.senses.count("E") == m + h


def test_greedy_gap_relaxation():
    net, tree = gen_greedy_gap_example()
    inst = instance_from_coverage(compute_coverage(net, tree), {e: 1.0 for e in tree.edges})
    sol = solve_lp(build_mssc_lp(inst))
    assert sol.objective <= 6.0 + 1e-7


def test_sanity_lps():
    upper = LpModel.from_dense(cost=[-1.0], matrix=[[1.0]], senses=["L"], rhs=[5.0])
    sol = solve_lp(upper)
    assert sol.values[0] == pytest.approx(5.0)
    assert sol.objective == pytest.approx(-5.0)

    clash = LpModel.from_dense(cost=[1.0], matrix=[[1.0], [1.0]], senses=["G", "L"], rhs=[1, 0])
    with pytest.raises(Infeasible):
        solve_lp(clash)
    assert solve_lp(clash, raise_on_failure=False).status == STATUS_INFEASIBLE

    open_ended = LpModel.from_dense(cost=[-1.0], matrix=[[1.0]], senses=["G"], rhs=[0.0])
    with pytest.raises(Unbounded):
        solve_lp(open_ended)
    assert solve_lp(open_ended, raise_on_failure=False).status == STATUS_UNBOUNDED


def test_model_validation():
    with pytest.raises(ValueError):
        LpModel.from_dense(cost=[1.0], matrix=[[1.0]], senses=["G"], rhs=[float("inf")])
    with pytest.raises(ValueError):
        LpModel.from_dense(cost=[1.0], matrix=[[1.0]], senses=["?"], rhs=[1.0])


def test_appendix_schedule_on_complete_block():
    gap = gen_integrality_gap(GapFamilyParams(c=3, N=6, k=1))
    assert gap.instance.n == 6
    assert gap.instance.m == 20
    model = build_mssc_lp(gap.instance, gap.horizon)
    point = np.concatenate([gap.x.ravel(), gap.u.ravel()])
    assert check_feasibility(model, point) < 1e-9
    assert mssc_point_cost(model, gap.x, gap.u) == pytest.approx(gap.point_cost)
    sol = solve_lp(model)
    assert sol.objective <= gap.point_cost + 1e-7


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(200))
def test_relaxation_bounds_exact(seed):
    inst = random_instance(seed, n=4 + seed % 5, m=7, c=3)
    model = build_mssc_lp(inst)
    sol = solve_lp(model)
    assert check_feasibility(model, sol.values) <= 1e-7
    assert sol.objective == pytest.approx(float(model.cost @ sol.values), rel=1e-7, abs=1e-9)
    assert sol.objective <= exact_order_dp(inst).objective + 1e-7


@pytest.mark.parametrize("seed", range(4))
def test_duals_certify_optimality(seed):
    inst = random_instance(20 + seed, n=5, m=6, c=3, integer_weights=False)
    model = build_mssc_lp(inst)
    sol = solve_lp(model)
    reduced = model.cost - model.matrix.T @ sol.duals
    assert reduced.min() >= -1e-6
    assert np.abs(reduced * sol.values).max() <= 1e-6
    assert float(model.rhs @ sol.duals) == pytest.approx(sol.objective, abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_agrees_with_scipy(seed):
    inst = random_instance(40 + seed, n=6, m=8, c=3, integer_weights=False)
    model = build_mssc_lp(inst)
    a = model.matrix.toarray()
    senses = np.array(model.senses)
    ge, eq = senses == "G", senses == "E"
    ref = linprog(
        model.cost,
        A_ub=-a[ge],
        b_ub=-model.rhs[ge],
        A_eq=a[eq],
        b_eq=model.rhs[eq],
        bounds=(0, None),
        method="highs",
    )
    assert ref.status == 0
    assert solve_lp(model).objective == pytest.approx(ref.fun, rel=1e-6, abs=1e-9)


def test_deterministic():
    model = build_mssc_lp(random_instance(3, n=6, m=8, c=3))
    first, second = solve_lp(model), solve_lp(model)
    assert np.array_equal(first.values, second.values)
    assert first.iterations == second.iterations


def test_iteration_limit():
    model = build_mssc_lp(random_instance(3, n=6, m=8, c=3))
    with pytest.raises(IterationLimit):
        solve_lp(model, max_iterations=1)


def test_solver_settings():
    solver = SimplexSolver(refactor_every=1, stall_limit=1)
    model = build_mssc_lp(random_instance(4, n=5, m=6, c=3))
    assert solver.solve(model).objective == pytest.approx(solve_lp(model).objective)


def test_horizon_checks():
    singles = MsscInstance.build(["a", "b", "c"], [((v,), 1.0) for v in "abc"])
    with pytest.raises(InfeasibleHorizon) as info:
        build_mssc_lp(singles, 2)
    assert info.value.horizon == 2
    with pytest.raises(InfeasibleHorizon):
        check_horizon(singles, 0)

    hub = MsscInstance.build(["a", "b", "c"], [(("a", "b"), 1.0), (("b", "c"), 1.0)])
    check_horizon(hub, 1)
    assert solve_lp(build_mssc_lp(hub, 1)).objective == pytest.approx(2.0)

    with pytest.raises(EmptyInstance):
        build_mssc_lp(MsscInstance.build(["a"], []))


def test_lp_text(tmp_path):
    inst = MsscInstance.build(["a", "b"], [(("a", "b"), 2.0)])
    model = build_mssc_lp(inst)
    text = format_lp(model)
    assert text.splitlines()[1] == "Minimize"
    assert " obj: 2 u_0_1 + 4 u_0_2" in text
    assert " cover_0_1: 1 x_0_1 + 1 x_1_1 - 1 u_0_1 >= 0" in text
    assert " assign_0: 1 u_0_1 + 1 u_0_2 = 1" in text
    assert text.endswith("End\n")
    path = str(tmp_path / "model.lp")
    write_lp_file(model, path)
    with open(path) as f:
        assert f.read() == text
