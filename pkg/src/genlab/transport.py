"""Transport-type distances between distributions on a finite metric space.

The 1-Wasserstein distance is computed twice, by independent routes: the
primal with the transportation simplex, the Kantorovich dual with the
general tableau simplex. Prokhorov is computed exactly by subset
enumeration, bounded-Lipschitz by an LP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure, SpaceTooLarge
from .lp import LpStatus, linprog, transport_simplex
from .space import (
    Coupling,
    Distribution,
    FiniteMetricSpace,
    JointDistribution,
    check_on_space,
    check_same_support,
)

DEFAULT_MAX_ITERS = 10_000
DEFAULT_PROKHOROV_CAP = 16


@dataclass(frozen=True)
class TransportPlan:
    coupling: Coupling
    cost: float

    @property
    def probs(self) -> np.ndarray:
        return self.coupling.probs


def _pair(p: Distribution, q: Distribution, space: FiniteMetricSpace) -> None:
    check_same_support(p, q)
    check_on_space(p, space)


def wasserstein1(
    p: Distribution, q: Distribution, space: FiniteMetricSpace, max_iters: int = DEFAULT_MAX_ITERS
) -> tuple[float, TransportPlan]:
    """Exact W1 via the transportation simplex, with a witnessing optimal plan."""
    _pair(p, q, space)
    plan, _, _ = transport_simplex(p.probs, q.probs, space.dist, max_iters=max_iters)
    cost = float(np.sum(plan * space.dist))
    joint = JointDistribution(space, space, _renormalize(plan))
    return max(cost, 0.0), TransportPlan(Coupling(joint, p, q), max(cost, 0.0))


def _renormalize(plan: np.ndarray) -> np.ndarray:
    # Pivoting leaves ulp-level mass drift; fold it into the largest cell.
    plan = plan.copy()
    k = np.unravel_index(np.argmax(plan), plan.shape)
    plan[k] = 0.0
    plan[k] = max(0.0, 1.0 - plan.sum())
    return plan


def _pairwise_rows(n: int) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Constraint rows f_i - f_j for every ordered pair i != j."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    A = np.zeros((len(pairs), n))
    for r, (i, j) in enumerate(pairs):
        A[r, i] = 1.0
        A[r, j] = -1.0
    return A, pairs


def wasserstein1_dual(
    p: Distribution, q: Distribution, space: FiniteMetricSpace, max_iters: int = DEFAULT_MAX_ITERS
) -> tuple[float, np.ndarray]:
    """Kantorovich dual: max sum f (p - q) over 1-Lipschitz f.

    Returns the value and a maximising potential shifted so that min f = 0.
    """
    _pair(p, q, space)
    n = len(space)
    diff = p.probs - q.probs
    if n == 1:
        return 0.0, np.zeros(1)
    A, pairs = _pairwise_rows(n)
    b = np.array([space.dist[i, j] for i, j in pairs])
    # f = f_plus - f_minus with both parts nonnegative.
    A_split = np.hstack([A, -A])
    sol = linprog(np.concatenate([-diff, diff]), A_ub=A_split, b_ub=b, max_iters=max_iters)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"W1 dual LP ended {sol.status.value}", sol.iterations)
    f = sol.variables[:n] - sol.variables[n:]
    f = f - f.min()
    return max(float(f @ diff), 0.0), f


def tv_coupling(p: Distribution, q: Distribution) -> tuple[float, Coupling]:
    """Maximal coupling: min P(X != Y), witnessed by min(p, q) on the diagonal."""
    check_same_support(p, q)
    a, b = p.probs, q.probs
    common = np.minimum(a, b)
    value = float(max(0.0, 1.0 - common.sum()))
    plan = np.diag(common)
    ra = a - common
    rb = b - common
    mass = ra.sum()
    if mass > 0:
        plan = plan + np.outer(ra, rb) / mass
    joint = JointDistribution(p.space, q.space, _renormalize(plan))
    return value, Coupling(joint, p, q)


def prokhorov(
    p: Distribution, q: Distribution, space: FiniteMetricSpace, cap: int = DEFAULT_PROKHOROV_CAP
) -> float:
    """Smallest alpha with P(B) <= Q(B^alpha) + alpha for every subset B.

    ``B^alpha`` is the closed alpha-neighbourhood of ``B``. The fattening is
    piecewise constant in alpha with breaks at the pairwise distances, so on
    each interval ``[d_k, d_{k+1})`` the least feasible alpha is
    ``max(d_k, g(d_k))`` with ``g(a) = max_B P(B) - Q(B^a)``; since every
    candidate of a later interval is at least ``d_{k+1}``, the first interval
    that yields a candidate below its right end gives the answer.
    """
    _pair(p, q, space)
    n = len(space)
    if n > cap:
        raise SpaceTooLarge(f"Prokhorov enumeration over {n} points exceeds cap {cap}")
    # Adding q-side points of zero P-mass to B only grows B^alpha, so B ranges
    # over subsets of supp(P).
    support = np.flatnonzero(p.probs > 0)
    k = support.size
    masks = np.arange(1 << k, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(bool)
    member = np.zeros((1 << k, n), dtype=np.uint8)
    member[:, support] = bits
    p_mass = member @ p.probs

    breaks = np.unique(np.concatenate([[0.0], space.dist[np.triu_indices(n, 1)]]))
    for idx, a in enumerate(breaks):
        right = breaks[idx + 1] if idx + 1 < breaks.size else np.inf
        reach = (space.dist <= a).astype(np.uint8)
        fattened = (member @ reach) > 0
        g = float(np.max(p_mass - fattened @ q.probs))
        candidate = max(float(a), g)
        if candidate < right:
            return min(candidate, 1.0)
    return 1.0  # unreachable: the last interval is unbounded


def bounded_lipschitz(
    p: Distribution, q: Distribution, space: FiniteMetricSpace, max_iters: int = DEFAULT_MAX_ITERS
) -> float:
    """max sum f (p - q) over f with |f| <= 1 and Lip(f) <= 1."""
    _pair(p, q, space)
    n = len(space)
    diff = p.probs - q.probs
    if n == 1:
        return 0.0
    A, pairs = _pairwise_rows(n)
    b = np.array([space.dist[i, j] for i, j in pairs])
    # Shift g = f + 1 so that g >= 0 and the box becomes g <= 2.
    A_ub = np.vstack([A, np.eye(n)])
    b_ub = np.concatenate([b, np.full(n, 2.0)])
    sol = linprog(-diff, A_ub=A_ub, b_ub=b_ub, max_iters=max_iters)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"bounded-Lipschitz LP ended {sol.status.value}", sol.iterations)
    f = sol.variables - 1.0
    return float(np.clip(f @ diff, 0.0, 2.0))
