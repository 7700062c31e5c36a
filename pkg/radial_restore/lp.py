"""The time-indexed LP relaxation of Min Sum Set Cover and a revised simplex solver.

Variables are x[v,t] (vertex v takes slot t) and u[e,t] (hyperedge e is
covered at slot t). The model minimizes sum t b(e) u[e,t] subject to

- sum_{v in e} x[v,t] >= u[e,t] for every e and t,
- sum_t u[e,t] = 1 for every e,
- sum_v x[v,t] = 1 for every t,

with every variable nonnegative.
"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import math
from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu
from traitlets import Float
from traitlets import Integer
from traitlets.config import LoggingConfigurable

from ._version import __version__
from .errors import EmptyInstance
from .errors import Infeasible
from .errors import InfeasibleHorizon
from .errors import IterationLimit
from .errors import Unbounded
from .mssc import MsscInstance

SENSES = ("G", "E", "L")

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class MsscLayout:
    """Where x and u live in the variable vector of an MSSC model."""

    vertices: Tuple[str, ...]
    n: int
    m: int
    horizon: int

    def x_index(self, v: int, t: int) -> int:
        return v * self.horizon + t - 1

    def u_index(self, j: int, t: int) -> int:
        return self.n * self.horizon + j * self.horizon + t - 1


@dataclass(frozen=True)
class LpModel:
    """minimize cost @ z subject to matrix @ z (senses) rhs and z >= 0."""

    matrix: sparse.csc_matrix
    senses: Tuple[str, ...]
    rhs: np.ndarray
    cost: np.ndarray
    names: Tuple[str, ...]
    row_names: Tuple[str, ...]
    layout: Optional[MsscLayout] = None

    def __post_init__(self):
        rows, cols = self.matrix.shape
        if len(self.senses) != rows or self.rhs.shape != (rows,) or len(self.row_names) != rows:
            raise ValueError("Row data does not match a %i-row matrix" % rows)
        if self.cost.shape != (cols,) or len(self.names) != cols:
            raise ValueError("Column data does not match a %i-column matrix" % cols)
        if any(s not in SENSES for s in self.senses):
            raise ValueError("Row senses must be among %s" % (SENSES,))
        if not (
            np.all(np.isfinite(self.matrix.data))
            and np.all(np.isfinite(self.rhs))
            and np.all(np.isfinite(self.cost))
        ):
            raise ValueError("LP coefficients must be finite")

    @classmethod
    def from_dense(
        cls,
        cost: Sequence[float],
        matrix: Sequence[Sequence[float]],
        senses: Sequence[str],
        rhs: Sequence[float],
        names: Optional[Sequence[str]] = None,
    ) -> "LpModel":
        a = sparse.csc_matrix(np.asarray(matrix, dtype=float).reshape(len(rhs), len(cost)))
        return cls(
            matrix=a,
            senses=tuple(senses),
            rhs=np.asarray(rhs, dtype=float),
            cost=np.asarray(cost, dtype=float),
            names=tuple(names) if names is not None else tuple("z%i" % i for i in range(len(cost))),
            row_names=tuple("r%i" % i for i in range(len(rhs))),
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape


@dataclass(frozen=True)
class LpSolution:
    status: str
    objective: float
    values: np.ndarray
    duals: Optional[np.ndarray]
    iterations: int
    x: Optional[np.ndarray] = None
    u: Optional[np.ndarray] = None

    def to_dict(self) -> Dict[str, Any]:
        return dict(status=self.status, objective=self.objective, iterations=self.iterations)


def _greedy_cover_size(inst: MsscInstance) -> int:
    """Size of a greedy set of vertices hitting every hyperedge."""
    open_edges = [set(h.members) for h in inst.hyperedges]
    count = 0
    while open_edges:
        tally: Dict[str, int] = {}
        for members in open_edges:
            for v in members:
                tally[v] = tally.get(v, 0) + 1
        pick = max(sorted(tally), key=lambda v: tally[v])
        open_edges = [e for e in open_edges if pick not in e]
        count += 1
    return count


def check_horizon(inst: MsscInstance, horizon: int) -> None:
    """Refuse horizons that may leave the model without a feasible point."""
    if horizon < 1:
        raise InfeasibleHorizon("Horizon must be at least 1", horizon)
    if horizon >= inst.n:
        return
    smallest = min(len(h.members) for h in inst.hyperedges)
    if horizon >= math.ceil(inst.n / smallest):
        return
    if _greedy_cover_size(inst) <= horizon:
        return
    raise InfeasibleHorizon(
        "Horizon %i is too short to cover %i hyperedges over %i vertices"
        % (horizon, inst.m, inst.n),
        horizon,
    )


def build_mssc_lp(inst: MsscInstance, horizon: Optional[int] = None) -> LpModel:
    """The LP relaxation of ``inst`` over ``horizon`` slots (default: one per vertex)."""
    if inst.n == 0 or inst.m == 0:
        raise EmptyInstance("Instance has no hyperedges to cover")
    n, m = inst.n, inst.m
    big_h = n if horizon is None else int(horizon)
    check_horizon(inst, big_h)
    layout = MsscLayout(vertices=inst.vertices, n=n, m=m, horizon=big_h)
    cols = n * big_h + m * big_h

    data: List[float] = []
    row_ind: List[int] = []
    col_ind: List[int] = []
    senses: List[str] = []
    rhs: List[float] = []
    row_names: List[str] = []

    def add(row: int, col: int, value: float) -> None:
        row_ind.append(row)
        col_ind.append(col)
        data.append(value)

    members = inst.member_indices()
    row = 0
    for j in range(m):
        for t in range(1, big_h + 1):
            for v in members[j]:
                add(row, layout.x_index(int(v), t), 1.0)
            add(row, layout.u_index(j, t), -1.0)
            senses.append("G")
            rhs.append(0.0)
            row_names.append("cover_%i_%i" % (j, t))
            row += 1
    for j in range(m):
        for t in range(1, big_h + 1):
            add(row, layout.u_index(j, t), 1.0)
        senses.append("E")
        rhs.append(1.0)
        row_names.append("assign_%i" % j)
        row += 1
    for t in range(1, big_h + 1):
        for v in range(n):
            add(row, layout.x_index(v, t), 1.0)
        senses.append("E")
        rhs.append(1.0)
        row_names.append("slot_%i" % t)
        row += 1

    cost = np.zeros(cols)
    for j, h in enumerate(inst.hyperedges):
        for t in range(1, big_h + 1):
            cost[layout.u_index(j, t)] = t * h.weight
    names = ["x_%i_%i" % (v, t) for v in range(n) for t in range(1, big_h + 1)]
    names += ["u_%i_%i" % (j, t) for j in range(m) for t in range(1, big_h + 1)]

    matrix = sparse.csc_matrix((data, (row_ind, col_ind)), shape=(row, cols))
    return LpModel(
        matrix=matrix,
        senses=tuple(senses),
        rhs=np.array(rhs),
        cost=cost,
        names=tuple(names),
        row_names=tuple(row_names),
        layout=layout,
    )


def mssc_point_cost(model: LpModel, x: np.ndarray, u: np.ndarray) -> float:
    return float(model.cost @ np.concatenate([np.ravel(x), np.ravel(u)]))


def check_feasibility(model: LpModel, values: np.ndarray) -> float:
    """Largest violation of any row or sign constraint by ``values``."""
    lhs = model.matrix @ values
    gap = lhs - model.rhs
    senses = np.array(model.senses)
    violation = np.where(senses == "G", -gap, np.where(senses == "L", gap, np.abs(gap)))
    worst = float(max(violation.max(initial=0.0), 0.0))
    return max(worst, float(-np.min(values, initial=0.0)))


class _Basis:
    """LU of the basis columns plus an eta file of pivots since the last refactor."""

    def __init__(self, a: sparse.csc_matrix, basis: List[int]):
        self.a = a
        self.lu = splu(sparse.csc_matrix(a[:, basis]))
        self.etas: List[Tuple[int, np.ndarray]] = []

    def ftran(self, col: np.ndarray) -> np.ndarray:
        w = self.lu.solve(col)
        for r, alpha in self.etas:
            theta = w[r] / alpha[r]
            w -= theta * alpha
            w[r] = theta
        return w

    def btran(self, c_b: np.ndarray) -> np.ndarray:
        v = c_b.copy()
        for r, alpha in reversed(self.etas):
            off = float(alpha @ v) - alpha[r] * v[r]
            v[r] = (v[r] - off) / alpha[r]
        return self.lu.solve(v, trans="T")

    def push(self, r: int, alpha: np.ndarray) -> None:
        self.etas.append((r, alpha.copy()))


class SimplexSolver(LoggingConfigurable):
    """Two-phase revised simplex on sparse models.

    Pricing is Dantzig's rule; after ``stall_limit`` consecutive degenerate
    pivots it switches to Bland's rule until a pivot makes progress.
    """

    tol = Float(1e-7, config=True, help="Optimality and feasibility tolerance.")
    pivot_tol = Float(1e-9, config=True, help="Smallest pivot element accepted by the ratio test.")
    refactor_every = Integer(64, config=True, help="Pivots between basis refactorizations.")
    stall_limit = Integer(
        50, config=True, help="Consecutive degenerate pivots before switching to Bland's rule."
    )
    max_iterations = Integer(10 ** 6, config=True, help="Pivot limit over both phases.")

    def solve(self, model: LpModel, raise_on_failure: bool = True) -> LpSolution:
        rows, cols = model.shape
        a = model.matrix.tocsc().astype(float)
        b = model.rhs.astype(float).copy()
        senses = list(model.senses)

        # flip rows so b >= 0; G rows at zero become L rows so their slack can start basic
        sign = np.ones(rows)
        for i in range(rows):
            if b[i] < 0 or (senses[i] == "G" and b[i] == 0):
                sign[i] = -1.0
                b[i] = -b[i]
                senses[i] = {"G": "L", "L": "G", "E": "E"}[senses[i]]
        a = sparse.diags(sign) @ a

        slack_rows = [i for i in range(rows) if senses[i] != "E"]
        art_rows = [i for i in range(rows) if senses[i] != "L"]
        n_slack, n_art = len(slack_rows), len(art_rows)
        slack = sparse.csc_matrix(
            (
                [1.0 if senses[i] == "L" else -1.0 for i in slack_rows],
                (slack_rows, range(n_slack)),
            ),
            shape=(rows, n_slack),
        )
        art = sparse.csc_matrix(([1.0] * n_art, (art_rows, range(n_art))), shape=(rows, n_art))
        std = sparse.hstack([a, slack, art], format="csc")
        total = cols + n_slack + n_art
        first_art = cols + n_slack

        basis_of_row: Dict[int, int] = {}
        for k, i in enumerate(slack_rows):
            if senses[i] == "L":
                basis_of_row[i] = cols + k
        for k, i in enumerate(art_rows):
            basis_of_row[i] = first_art + k
        basis = [basis_of_row[i] for i in range(rows)]

        self._iterations = 0
        phase1 = np.zeros(total)
        phase1[first_art:] = 1.0
        blocked = np.zeros(total, dtype=bool)
        if n_art:
            value, basis, xb = self._run(std, b, phase1, basis, blocked, None)
            if value > self.tol * max(1.0, float(np.abs(b).max(initial=0.0))):
                self.log.debug("Phase one ends at infeasibility %g", value)
                if raise_on_failure:
                    raise Infeasible("The LP has no feasible point (phase one value %g)" % value)
                return LpSolution(
                    STATUS_INFEASIBLE, math.nan, np.full(cols, np.nan), None, self._iterations
                )
        blocked[first_art:] = True

        phase2 = np.zeros(total)
        phase2[:cols] = model.cost
        try:
            value, basis, xb = self._run(std, b, phase2, basis, blocked, first_art)
        except Unbounded:
            if raise_on_failure:
                raise
            return LpSolution(
                STATUS_UNBOUNDED, -math.inf, np.full(cols, np.nan), None, self._iterations
            )

        full = np.zeros(total)
        full[basis] = xb
        values = full[:cols]
        factor = _Basis(std, basis)
        duals = sign * factor.btran(phase2[basis])
        objective = float(model.cost @ values)
        self.log.debug(
            "Simplex optimum %.12g after %i pivots on %i x %i",
            objective,
            self._iterations,
            rows,
            cols,
        )
        x = u = None
        if model.layout is not None:
            lay = model.layout
            x = values[: lay.n * lay.horizon].reshape(lay.n, lay.horizon)
            u = values[lay.n * lay.horizon :].reshape(lay.m, lay.horizon)
        return LpSolution(
            status=STATUS_OPTIMAL,
            objective=objective,
            values=values,
            duals=duals,
            iterations=self._iterations,
            x=x,
            u=u,
        )

    def _run(
        self,
        a: sparse.csc_matrix,
        b: np.ndarray,
        cost: np.ndarray,
        basis: List[int],
        blocked: np.ndarray,
        first_art: Optional[int],
    ) -> Tuple[float, List[int], np.ndarray]:
        basis = list(basis)
        at = a.T.tocsr()
        factor = _Basis(a, basis)
        xb = factor.ftran(b)
        since_refactor = 0
        stalled = 0
        bland = False
        while True:
            if since_refactor >= self.refactor_every:
                factor = _Basis(a, basis)
                xb = factor.ftran(b)
                xb[np.abs(xb) < 1e-13] = 0.0
                since_refactor = 0
                self.log.debug("Refactored basis after %i pivots", self._iterations)

            y = factor.btran(cost[basis])
            reduced = cost - at @ y
            reduced[basis] = 0.0
            reduced[blocked] = 0.0
            improving = np.flatnonzero(reduced < -self.tol)
            if improving.size == 0:
                break
            if bland:
                q = int(improving[0])
            else:
                q = int(improving[np.argmin(reduced[improving])])

            alpha = factor.ftran(a[:, q].toarray().ravel())
            r = self._ratio(alpha, xb, basis, bland, first_art)
            if r < 0:
                raise Unbounded("The LP objective is unbounded below along column %i" % q)
            theta = max(xb[r] / alpha[r], 0.0)
            xb -= theta * alpha
            xb[r] = theta
            basis[r] = q
            factor.push(r, alpha)
            since_refactor += 1
            self._iterations += 1
            if self._iterations >= self.max_iterations:
                raise IterationLimit(self._iterations)

            if theta <= 1e-12:
                stalled += 1
                if not bland and stalled >= self.stall_limit:
                    bland = True
                    self.log.debug("Switching to Bland's rule after %i degenerate pivots", stalled)
            else:
                stalled = 0
                bland = False

        factor = _Basis(a, basis)
        xb = factor.ftran(b)
        xb[np.abs(xb) < 1e-13] = 0.0
        return float(cost[basis] @ xb), basis, xb

    def _ratio(
        self,
        alpha: np.ndarray,
        xb: np.ndarray,
        basis: List[int],
        bland: bool,
        first_art: Optional[int],
    ) -> int:
        # artificials left basic after phase one must stay at zero: they leave first
        if first_art is not None:
            for i, var in enumerate(basis):
                if var >= first_art and abs(alpha[i]) > self.pivot_tol:
                    return i
        rows = np.flatnonzero(alpha > self.pivot_tol)
        if rows.size == 0:
            return -1
        ratios = np.maximum(xb[rows], 0.0) / alpha[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
        if bland:
            return int(min(ties, key=lambda i: basis[i]))
        return int(max(ties, key=lambda i: (alpha[i], -basis[i])))


def solve_lp(
    model: LpModel,
    tol: float = 1e-7,
    max_iterations: int = 10 ** 6,
    raise_on_failure: bool = True,
    **kwargs: Any,
) -> LpSolution:
    """Solve ``model`` to an optimal basic solution.

    Raises :class:`~radial_restore.errors.Infeasible`,
    :class:`~radial_restore.errors.Unbounded` or
    :class:`~radial_restore.errors.IterationLimit`; with
    ``raise_on_failure=False`` the first two are reported through the
    solution status instead.
    """
    solver = SimplexSolver(tol=tol, max_iterations=max_iterations, **kwargs)
    return solver.solve(model, raise_on_failure=raise_on_failure)


def _format_terms(coeffs: Sequence[Tuple[float, str]]) -> List[str]:
    terms = []
    for i, (value, name) in enumerate(coeffs):
        op = "-" if value < 0 else "+"
        text = "%s %s" % (format(abs(value), ".17g"), name)
        terms.append(text if i == 0 and op == "+" else "%s %s" % (op, text))
    return terms


def _wrap(head: str, terms: List[str], tail: str = "") -> str:
    lines = []
    line = head
    for term in terms:
        if len(line) + len(term) > 200:
            lines.append(line)
            line = "   "
        line += " " + term
    line += tail
    lines.append(line)
    return "\n".join(lines)


def format_lp(model: LpModel) -> str:
    """The model in CPLEX LP text format."""
    out = ["\\ radial_restore %s" % __version__, "Minimize"]
    nz = [(float(c), model.names[j]) for j, c in enumerate(model.cost) if c != 0]
    if not nz and model.names:
        nz = [(0.0, model.names[0])]
    out.append(_wrap(" obj:", _format_terms(nz)))
    out.append("Subject To")
    csr = model.matrix.tocsr()
    ops = {"G": ">=", "E": "=", "L": "<="}
    for i in range(csr.shape[0]):
        start, end = csr.indptr[i], csr.indptr[i + 1]
        coeffs = [
            (float(v), model.names[j])
            for v, j in zip(csr.data[start:end], csr.indices[start:end])
        ]
        if not coeffs:
            coeffs = [(0.0, model.names[0])]
        tail = " %s %s" % (ops[model.senses[i]], format(float(model.rhs[i]), ".17g"))
        out.append(_wrap(" %s:" % model.row_names[i], _format_terms(coeffs), tail))
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp_file(model: LpModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_lp(model))
