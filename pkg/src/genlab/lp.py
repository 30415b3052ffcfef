"""Small dense LP engine.

Two solvers, both deterministic and both using Bland's rule (lowest-index
entering variable, lowest-index leaving variable among ratio ties) so that
degenerate problems cannot cycle:

* :func:`linprog` -- two-phase tableau simplex for
  ``min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0``.
* :func:`transport_simplex` -- the transportation specialisation (MODI
  potentials on a spanning-tree basis) started from the north-west corner.

Problem sizes in this package are tiny (a few dozen points), so clarity and
reproducibility matter more than asymptotic speed.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure

PIVOT_TOL = 1e-11


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    objective: float
    variables: np.ndarray
    status: LpStatus
    iterations: int


class _Tableau:
    def __init__(self, T: np.ndarray, rhs: np.ndarray, basis: list[int]):
        self.T = T
        self.rhs = rhs
        self.basis = basis
        self.iterations = 0

    def pivot(self, r: int, j: int) -> None:
        T, rhs = self.T, self.rhs
        piv = T[r, j]
        T[r] /= piv
        rhs[r] /= piv
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.nonzero(col)[0]
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
            rhs[nz] -= col[nz] * rhs[r]
            np.maximum(rhs, 0.0, out=rhs)
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j

    def run(self, cost: np.ndarray, allowed: int, max_iters: int) -> LpStatus:
        """Minimise ``cost`` over the first ``allowed`` columns."""
        scale = max(1.0, float(np.max(np.abs(cost[:allowed]), initial=0.0)))
        tol = PIVOT_TOL * scale
        while True:
            cb = cost[self.basis]
            reduced = cost[:allowed] - cb @ self.T[:, :allowed]
            candidates = np.nonzero(reduced < -tol)[0]
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            if self.iterations >= max_iters:
                raise SolverFailure("simplex iteration cap reached", self.iterations)
            j = int(candidates[0])
            col = self.T[:, j]
            rows = np.nonzero(col > PIVOT_TOL)[0]
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = self.rhs[rows] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, best)]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, j)
            self.iterations += 1


def linprog(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    max_iters: int = 10_000,
) -> LpSolution:
    """Minimise ``c @ x`` subject to linear constraints and ``x >= 0``.

    Returns an :class:`LpSolution`; infeasible and unbounded problems are
    reported through ``status``. Raises :class:`SolverFailure` when the
    iteration cap is hit.
    """
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # Columns: [x | slacks | artificials].
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    rhs = np.concatenate([b_ub, b_eq])
    neg = rhs < 0
    A[neg] *= -1.0
    rhs = np.abs(rhs)

    needs_art = [i for i in range(m) if i >= m_ub or neg[i]]
    n_struct = n + m_ub
    T = np.zeros((m, n_struct + len(needs_art)))
    T[:, :n_struct] = A
    basis = [n + i if i < m_ub else -1 for i in range(m)]
    for k, i in enumerate(needs_art):
        T[i, n_struct + k] = 1.0
        basis[i] = n_struct + k
    tab = _Tableau(T, rhs.copy(), basis)

    if needs_art:
        phase1 = np.zeros(T.shape[1])
        phase1[n_struct:] = 1.0
        tab.run(phase1, T.shape[1], max_iters)
        infeas = float(phase1[tab.basis] @ tab.rhs)
        if infeas > 1e-9 * max(1.0, float(np.abs(rhs).max(initial=0.0))):
            return LpSolution(np.nan, np.full(n, np.nan), LpStatus.INFEASIBLE, tab.iterations)
        # Drive remaining artificials out of the basis; drop redundant rows.
        keep = []
        for r in range(m):
            if tab.basis[r] < n_struct:
                keep.append(r)
                continue
            row = tab.T[r, :n_struct]
            cols = np.nonzero(np.abs(row) > 1e-9)[0]
            if cols.size:
                tab.pivot(r, int(cols[0]))
                keep.append(r)
        tab.T = tab.T[keep][:, :n_struct].copy()
        tab.rhs = tab.rhs[keep].copy()
        tab.basis = [tab.basis[r] for r in keep]

    cost = np.zeros(n_struct)
    cost[:n] = c
    status = tab.run(cost, n_struct, max_iters)
    x = np.zeros(n_struct)
    x[tab.basis] = tab.rhs
    x = x[:n]
    if status is LpStatus.UNBOUNDED:
        return LpSolution(-np.inf, x, status, tab.iterations)
    return LpSolution(float(c @ x), x, status, tab.iterations)


# --- transportation simplex --------------------------------------------------


def northwest_corner(supply: np.ndarray, demand: np.ndarray) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """North-west-corner start with exactly ``m + n - 1`` (possibly zero) basic cells."""
    m, n = len(supply), len(demand)
    s = supply.astype(float).copy()
    d = demand.astype(float).copy()
    plan = np.zeros((m, n))
    basis = []
    i = j = 0
    while True:
        x = min(s[i], d[j])
        plan[i, j] = x
        basis.append((i, j))
        s[i] -= x
        d[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif s[i] <= d[j]:
            i += 1
        else:
            j += 1
    return plan, basis


def _tree_path(basis: set[tuple[int, int]], m: int, start_row: int, end_col: int) -> list[tuple[int, int]]:
    """Basic cells on the tree path from row node ``start_row`` to column node ``end_col``."""
    adj: dict[tuple[str, int], list[tuple[tuple[str, int], tuple[int, int]]]] = {}
    for (i, j) in sorted(basis):
        adj.setdefault(("r", i), []).append((("c", j), (i, j)))
        adj.setdefault(("c", j), []).append((("r", i), (i, j)))
    start, goal = ("r", start_row), ("c", end_col)
    prev: dict = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt, cell in adj.get(node, []):
            if nxt not in prev:
                prev[nxt] = (node, cell)
                queue.append(nxt)
    if goal not in prev:
        raise SolverFailure("transportation basis is not a spanning tree", 0)
    path = []
    node = goal
    while prev[node] is not None:
        node, cell = prev[node]
        path.append(cell)
    path.reverse()
    return path


def transport_simplex(supply, demand, cost, max_iters: int = 10_000) -> tuple[np.ndarray, float, int]:
    """Solve the balanced transportation problem ``min <plan, cost>``.

    Returns ``(plan, objective, iterations)``.
    """
    supply = np.asarray(supply, dtype=float)
    demand = np.asarray(demand, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = cost.shape
    plan, cells = northwest_corner(supply, demand)
    basis = set(cells)
    scale = max(1.0, float(np.abs(cost).max(initial=0.0)))
    tol = PIVOT_TOL * scale
    iterations = 0
    while True:
        u, v = _potentials(basis, cost, m, n)
        reduced = cost - u[:, None] - v[None, :]
        for cell in basis:
            reduced[cell] = 0.0
        neg = np.flatnonzero(reduced < -tol)
        if neg.size == 0:
            break
        if iterations >= max_iters:
            raise SolverFailure("transportation simplex iteration cap reached", iterations)
        ei, ej = divmod(int(neg[0]), n)
        path = _tree_path(basis, m, ei, ej)
        # Walking back from the entering column, path cells alternate -, +, -, ...
        minus = path[::-2]
        plus = path[-2::-2]
        theta = min(plan[c] for c in minus)
        ties = [c for c in minus if plan[c] <= theta + 1e-15]
        leave = min(ties, key=lambda c: c[0] * n + c[1])
        for c in minus:
            plan[c] -= theta
        for c in plus:
            plan[c] += theta
        plan[ei, ej] += theta
        plan[leave] = 0.0
        np.maximum(plan, 0.0, out=plan)
        basis.remove(leave)
        basis.add((ei, ej))
        iterations += 1
    return plan, float(np.sum(plan * cost)), iterations


def _potentials(basis, cost, m, n) -> tuple[np.ndarray, np.ndarray]:
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    by_row: dict[int, list[int]] = {}
    by_col: dict[int, list[int]] = {}
    for i, j in basis:
        by_row.setdefault(i, []).append(j)
        by_col.setdefault(j, []).append(i)
    stack = [("r", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "r":
            for j in by_row.get(k, []):
                if np.isnan(v[j]):
                    v[j] = cost[k, j] - u[k]
                    stack.append(("c", j))
        else:
            for i in by_col.get(k, []):
                if np.isnan(u[i]):
                    u[i] = cost[i, k] - v[k]
                    stack.append(("r", i))
    return u, v
