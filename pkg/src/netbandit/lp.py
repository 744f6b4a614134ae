"""Exploration-allocation linear programs and a small deterministic simplex solver.

Every program here has the covering form ``min c.x  s.t.  A x >= b, x >= 0``
with ``c >= 0``. The slack basis is then dual feasible, so the dual simplex
method runs without a phase-one. Pivoting follows Bland's smallest-index rule,
which makes the result a reproducible vertex solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import BipartiteGraph

TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPError(ValueError):
    pass


@dataclass(frozen=True)
class AllocationLP:
    c: np.ndarray   # (n,) objective, non-negative
    A: np.ndarray   # (m, n) constraint rows
    b: np.ndarray   # (m,) right-hand sides
    row_labels: tuple[int, ...] = field(default=())  # base-arm behind each row, when built from a graph

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        a = np.asarray(self.A, dtype=float).reshape(-1, c.size)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.shape[0] != b.size:
            raise LPError(f"A has {a.shape[0]} rows but b has {b.size} entries")
        if not np.all(np.isfinite(b)) or not np.all(np.isfinite(a)) or not np.all(np.isfinite(c)):
            raise LPError("LP data must be finite")
        if np.any(c < 0):
            raise LPError("objective coefficients must be non-negative")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def scaled(self, alpha: float) -> "AllocationLP":
        return AllocationLP(self.c, self.A, self.b * alpha, self.row_labels)


@dataclass(frozen=True)
class AllocationSolution:
    x: np.ndarray
    objective: float
    status: str
    pivots: int = 0

    @property
    def total(self) -> float:
        return float(self.x.sum())


def solve_generic(lp: AllocationLP) -> AllocationSolution:
    """Dual simplex on the condensed tableau with Bland's rule.

    Tableau row 0 is the objective, rows 1..m the slacks ``s = A x - b``;
    column 0 holds constants. Variable labels: x_0..x_{n-1} -> 0..n-1,
    s_0..s_{m-1} -> n..n+m-1.
    """
    m, n = lp.shape
    if m == 0:
        return AllocationSolution(np.zeros(n), 0.0, OPTIMAL)
    tab = np.empty((m + 1, n + 1))
    tab[0, 0] = 0.0
    tab[0, 1:] = lp.c
    tab[1:, 0] = -lp.b
    tab[1:, 1:] = lp.A
    basic = np.arange(n, n + m)       # label of the basic variable in row r+1
    nonbasic = np.arange(n)           # label of the nonbasic variable in column k+1
    pivots = 0
    while True:
        infeasible = np.flatnonzero(tab[1:, 0] < -TOL)
        if infeasible.size == 0:
            break
        r = infeasible[np.argmin(basic[infeasible])] + 1
        row = tab[r, 1:]
        cand = np.flatnonzero(row > TOL)
        if cand.size == 0:
            return AllocationSolution(np.full(n, np.nan), float("nan"), INFEASIBLE, pivots)
        ratios = tab[0, 1 + cand] / row[cand]
        best = ratios.min()
        ties = cand[ratios <= best + TOL * max(1.0, abs(best))]
        k = ties[np.argmin(nonbasic[ties])] + 1
        _pivot(tab, r, k)
        basic[r - 1], nonbasic[k - 1] = nonbasic[k - 1], basic[r - 1]
        pivots += 1
    x = np.zeros(n)
    rows = np.flatnonzero(basic < n)
    x[basic[rows]] = tab[1 + rows, 0]
    x[np.abs(x) < TOL] = 0.0
    x = np.maximum(x, 0.0)
    return AllocationSolution(x, float(lp.c @ x), OPTIMAL, pivots)


def _pivot(tab: np.ndarray, r: int, k: int) -> None:
    p = tab[r, k]
    prow = tab[r].copy()
    col = tab[:, k].copy()
    tab -= np.outer(col / p, prow)
    tab[:, k] = col / p
    tab[r] = -prow / p
    tab[r, k] = 1.0 / p


def residuals(lp: AllocationLP, x: np.ndarray) -> np.ndarray:
    return lp.A @ x - lp.b


# --------------------------------------------------------------- builders

def build_p2(graph: BipartiteGraph) -> AllocationLP:
    """LP relaxation of minimum hitting set: min sum z s.t. sum_{j in S_i} z_j >= 1."""
    a = graph.incidence.astype(float)
    return AllocationLP(np.ones(graph.num_actions), a, np.ones(graph.num_base_arms),
                        tuple(range(graph.num_base_arms)))


def _check_obs_prob(graph: BipartiteGraph, obs_prob) -> np.ndarray:
    p = np.asarray(obs_prob, dtype=float).reshape(-1)
    if p.size != graph.num_actions:
        raise LPError(f"need one observation probability per action ({graph.num_actions}), got {p.size}")
    if np.any(p <= 0) or np.any(p > 1):
        raise LPError("observation probabilities must lie in (0, 1]")
    return p


def sporadic_matrix(graph: BipartiteGraph, obs_prob) -> np.ndarray:
    """Coefficient 1 where i is in K_j, p_j where i is only a side-observation of j."""
    p = _check_obs_prob(graph, obs_prob)
    a = np.zeros((graph.num_base_arms, graph.num_actions))
    for j, (v, k) in enumerate(zip(graph.observe_sets, graph.reward_sets)):
        for i in v:
            a[i, j] = 1.0 if i in k else p[j]
    return a


def build_p2_prime(graph: BipartiteGraph, obs_prob) -> AllocationLP:
    a = sporadic_matrix(graph, obs_prob)
    return AllocationLP(np.ones(graph.num_actions), a, np.ones(graph.num_base_arms),
                        tuple(range(graph.num_base_arms)))


def _p1(graph: BipartiteGraph, a: np.ndarray, gaps, j_const, suboptimal: Sequence[int]) -> AllocationLP:
    gaps = np.asarray(gaps, dtype=float)
    j_const = np.asarray(j_const, dtype=float)
    c = np.zeros(graph.num_actions)
    for j in suboptimal:
        if not gaps[j] > 0:
            raise LPError(f"gap of suboptimal action {j + 1} must be positive, got {gaps[j]}")
        c[j] = gaps[j]
    keep = [i for i in range(graph.num_base_arms) if np.isfinite(j_const[i])]
    bad = [i + 1 for i in keep if j_const[i] <= 0]
    if bad:
        raise LPError(f"J_i must be positive for constrained base-arms, violated at {bad}")
    b = np.array([1.0 / j_const[i] for i in keep])
    return AllocationLP(c, a[keep], b, tuple(keep))


def build_p1(graph: BipartiteGraph, gaps, j_const, suboptimal: Sequence[int]) -> AllocationLP:
    """Lower-bound program: min sum_U gap_j w_j s.t. sum_{S_i} w_j >= 1/J_i.

    Base-arms with ``j_const[i] = inf`` (1/J_i = 0, no constraint) are
    dropped; callers mark unbounded constraints with ``nan`` which is also
    dropped.
    """
    return _p1(graph, graph.incidence.astype(float), gaps, j_const, suboptimal)


def build_p1_prime(graph: BipartiteGraph, gaps, j_const, obs_prob, suboptimal: Sequence[int]) -> AllocationLP:
    return _p1(graph, sporadic_matrix(graph, obs_prob), gaps, j_const, suboptimal)


def solve_p2(graph: BipartiteGraph, obs_prob=None) -> AllocationSolution:
    lp = build_p2(graph) if obs_prob is None else build_p2_prime(graph, obs_prob)
    return solve_generic(lp)
