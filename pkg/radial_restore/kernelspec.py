"""Smoothing kernels for α-point rounding, and numeric checks of their bounds"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import json
import math
from dataclasses import asdict
from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import Iterable
from typing import List
from typing import Optional

import numpy as np
from traitlets import HasTraits
from traitlets import Integer
from traitlets import TraitError
from traitlets import Unicode
from traitlets import validate

from .errors import BoundViolated
from .errors import NoSuchKernel

KERNEL_KINDS = ("harmonic", "msvc", "power-law")


class KernelSpec(HasTraits):
    """A lower-triangular kernel K(t, t') = g(t') h(t) for t' <= t.

    ``power-law`` spreads with exponent 2/(c-1) and has row sums 2c/(c+1);
    ``msvc`` is the c = 2 kernel with row sums 4/3; ``harmonic`` is 2/t with
    row sums 2.
    """

    kind = Unicode("power-law")
    c = Integer(3)

    @validate("kind")
    def _valid_kind(self, proposal):
        value = proposal["value"].lower()
        if value not in KERNEL_KINDS:
            raise NoSuchKernel(proposal["value"])
        return value

    @validate("c")
    def _valid_c(self, proposal):
        if proposal["value"] < 1:
            raise TraitError("Kernel uniformity must be positive, got %r" % proposal["value"])
        return proposal["value"]

    @classmethod
    def for_uniformity(cls, c: int, kind: Optional[str] = None) -> "KernelSpec":
        """The kernel matched to a c-uniform instance, unless ``kind`` overrides it."""
        if kind is None:
            kind = "msvc" if c <= 2 else "power-law"
        return cls(kind=kind, c=max(int(c), 1))

    @property
    def beta(self) -> float:
        if self.kind == "power-law":
            return 2.0 * self.c / (self.c + 1)
        if self.kind == "msvc":
            return 4.0 / 3.0
        return 2.0

    @property
    def exponent(self) -> float:
        if self.c < 2:
            raise TraitError("The power-law kernel needs c >= 2")
        return 2.0 / (self.c - 1)

    def g(self, tp: np.ndarray) -> np.ndarray:
        """Column factor over 1-based t'."""
        tp = np.asarray(tp, dtype=float)
        if self.kind == "power-law":
            return self.beta * tp ** self.exponent
        if self.kind == "msvc":
            return 4.0 * tp * (tp + 1.0)
        return np.full_like(tp, 2.0)

    def h(self, t_max: int) -> np.ndarray:
        """Row factor for t = 1..t_max."""
        t = np.arange(1, t_max + 1, dtype=float)
        if self.kind == "power-law":
            return 1.0 / np.cumsum(t ** self.exponent)
        if self.kind == "msvc":
            return 1.0 / (t * (t + 1.0) * (t + 2.0))
        return 1.0 / t

    def matrix(self, rows: int, cols: int) -> np.ndarray:
        """K[t-1, t'-1] for t <= rows and t' <= cols, zero above the diagonal."""
        g = self.g(np.arange(1, cols + 1))
        k = self.h(rows)[:, None] * g[None, :]
        return np.tril(k)

    def row_sums(self, t_max: int) -> np.ndarray:
        return self.h(t_max) * np.cumsum(self.g(np.arange(1, t_max + 1)))

    def to_dict(self) -> Dict[str, Any]:
        return dict(kind=self.kind, c=self.c, beta=self.beta)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class KernelBoundsReport:
    kind: str
    c: int
    t_max: int
    max_row_error: float
    # largest T/t' at which a column first sums past one
    worst_crossing_ratio: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def verify_kernel_bounds(
    kernel: KernelSpec, t_max: int, row_tol: float = 1e-9, reach: int = 64
) -> KernelBoundsReport:
    """Check the row sums and the column divergence of ``kernel``.

    Every row t <= t_max must sum to the kernel's beta, and every column
    t' <= t_max must sum past one by some T <= reach * t'.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    rows = kernel.row_sums(t_max)
    errors = np.abs(rows - kernel.beta) / kernel.beta
    bad = np.flatnonzero(errors > row_tol)
    if bad.size:
        t = int(bad[0]) + 1
        raise BoundViolated(
            "Row %i of the %s kernel sums to %r, not %r"
            % (t, kernel.kind, rows[t - 1], kernel.beta),
            witness=dict(t=t, row_sum=float(rows[t - 1]), beta=kernel.beta),
        )

    horizon = reach * t_max
    tail = np.concatenate([[0.0], np.cumsum(kernel.h(horizon))])
    tp = np.arange(1, t_max + 1)
    # sum over t in [t', T] of h(t) is tail[T] - tail[t'-1]; find the first T past 1/g(t')
    target = tail[tp - 1] + 1.0 / kernel.g(tp)
    crossing = np.searchsorted(tail, target, side="right")
    late = np.flatnonzero(crossing > reach * tp)
    if late.size:
        t = int(tp[late[0]])
        raise BoundViolated(
            "Column %i of the %s kernel stays below one up to T = %i" % (t, kernel.kind, reach * t),
            witness=dict(t_prime=t, reach=reach * t),
        )
    return KernelBoundsReport(
        kind=kernel.kind,
        c=kernel.c,
        t_max=t_max,
        max_row_error=float(errors.max()),
        worst_crossing_ratio=float(np.max(crossing / tp)),
    )


@dataclass(frozen=True)
class LemmaReport:
    power_sum_checked: int
    power_sum_min_slack: float
    mean_bound_checked: int
    mean_bound_min_slack: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_P_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))


def default_uvq_grid() -> Dict[str, np.ndarray]:
    return dict(
        u=np.geomspace(1e-3, 10.0, 20),
        v=np.geomspace(1.0, 100.0, 20),
        q=np.linspace(-0.9, 0.0, 10),
    )


def verify_lemmas(
    t_max: int = 10 ** 4,
    p_grid: Optional[Iterable[float]] = None,
    uvq_grid: Optional[Dict[str, Iterable[float]]] = None,
    power_rtol: float = 1e-12,
    mean_rtol: float = 1e-9,
) -> LemmaReport:
    """Sweep the two analytic inequalities behind the power-law kernel.

    For 0 < p <= 1 and t <= t_max:
    sum_{i<=t} i^p <= p/(p+1) * t^p (t+1)^p / ((t+1)^p - t^p).

    For q in (-1, 0], 0 < u < v and v >= 1:
    integral_u^v x^q dx <= (v - u) (uv)^(q/2).
    """
    ps = np.asarray(list(p_grid if p_grid is not None else DEFAULT_P_GRID), dtype=float)
    if np.any(ps <= 0) or np.any(ps > 1):
        raise ValueError("Every p must lie in (0, 1]")
    t = np.arange(1, t_max + 1, dtype=float)
    power_slack: List[float] = []
    for p in ps:
        lhs = np.cumsum(t ** p)
        # (t+1)^p - t^p without cancellation
        gap = t ** p * np.expm1(p * np.log1p(1.0 / t))
        rhs = p / (p + 1.0) * t ** p * (t + 1.0) ** p / gap
        slack = (rhs - lhs) / rhs
        bad = np.flatnonzero(slack < -power_rtol)
        if bad.size:
            i = int(bad[0])
            raise BoundViolated(
                "Power sum bound fails at p=%r, t=%i" % (float(p), i + 1),
                witness=dict(p=float(p), t=i + 1, lhs=float(lhs[i]), rhs=float(rhs[i])),
            )
        power_slack.append(float(slack.min()))

    grid = uvq_grid if uvq_grid is not None else default_uvq_grid()
    u = np.asarray(list(grid["u"]), dtype=float)[:, None, None]
    v = np.asarray(list(grid["v"]), dtype=float)[None, :, None]
    q = np.asarray(list(grid["q"]), dtype=float)[None, None, :]
    if np.any(q <= -1) or np.any(q > 0):
        raise ValueError("Every q must lie in (-1, 0]")
    u, v, q = np.broadcast_arrays(u, v, q)
    keep = (u > 0) & (u < v) & (v >= 1)
    u, v, q = u[keep], v[keep], q[keep]
    # closed form of the integral, written to stay accurate as q -> 0
    integral = u ** (q + 1) * np.expm1((q + 1) * np.log(v / u)) / (q + 1)
    bound = (v - u) * u ** (q / 2) * v ** (q / 2)
    mean_slack = (bound - integral) / bound
    bad = np.flatnonzero(mean_slack < -mean_rtol)
    if bad.size:
        i = int(bad[0])
        raise BoundViolated(
            "Mean bound fails at u=%r, v=%r, q=%r" % (float(u[i]), float(v[i]), float(q[i])),
            witness=dict(u=float(u[i]), v=float(v[i]), q=float(q[i])),
        )

    return LemmaReport(
        power_sum_checked=len(ps) * t_max,
        power_sum_min_slack=min(power_slack) if power_slack else math.inf,
        mean_bound_checked=int(u.size),
        mean_bound_min_slack=float(mean_slack.min()) if mean_slack.size else math.inf,
    )
