"""f-divergences and Shannon quantities on finite spaces, in nats.

Functions accept :class:`Distribution`, :class:`JointDistribution` or plain
arrays; joints are compared entrywise as flattened probability vectors.
Infinite values (absolute continuity failures) are returned as ``math.inf``
rather than raised.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

from .errors import NonpositiveBound
from .space import JointDistribution, check_same_support

FACTORIZATION_TOL = 1e-12


def _vec(x) -> np.ndarray:
    return np.asarray(getattr(x, "probs", x), dtype=float).ravel()


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    check_same_support(p, q)
    return _vec(p), _vec(q)


def total_variation(p, q) -> float:
    a, b = _pair(p, q)
    return float(min(1.0, 0.5 * np.abs(a - b).sum()))


def tv_dual(p, q, F: float) -> float:
    """Normalised dual form (1/2F) max_{|f| <= F} sum f (p - q), attained at F sign(p - q)."""
    if not F > 0:
        raise NonpositiveBound(f"sup-norm bound must be positive, got {F}")
    a, b = _pair(p, q)
    diff = a - b
    f = F * np.sign(diff)
    return float(min(1.0, (f @ diff) / (2.0 * F)))


def kl(p, q) -> float:
    """Relative entropy KL(p || q); +inf when p is not absolutely continuous w.r.t. q."""
    a, b = _pair(p, q)
    mask = a > 0
    if np.any(b[mask] == 0):
        return math.inf
    a, b = a[mask], b[mask]
    with np.errstate(over="ignore"):
        ratio = a / b
    # A subnormal q can overflow the ratio; the log of a difference stays finite.
    logs = np.where(np.isfinite(ratio), np.log(ratio), np.log(a) - np.log(b))
    return float(max(0.0, np.sum(a * logs)))


def _product_of_marginals(probs: np.ndarray) -> np.ndarray:
    return np.outer(probs.sum(axis=1), probs.sum(axis=0))


def mutual_information(j) -> float:
    """I(X;Y) = KL(joint || product of marginals).

    Joints within ``FACTORIZATION_TOL`` (entrywise) of their product are
    reported as exactly independent.
    """
    probs = np.asarray(getattr(j, "probs", j), dtype=float)
    prod = _product_of_marginals(probs)
    if np.max(np.abs(probs - prod), initial=0.0) <= FACTORIZATION_TOL:
        return 0.0
    return kl(probs, prod)


def hellinger(p, q) -> float:
    """[sum (sqrt p - sqrt q)^2]^(1/2), unnormalised, in [0, sqrt 2]."""
    a, b = _pair(p, q)
    return float(math.sqrt(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2)))


def chi_squared(p, q) -> float:
    """sum (p - q)^2 / q, with 0/0 terms dropped and +inf when q_i = 0 < p_i."""
    a, b = _pair(p, q)
    pos = b > 0
    if np.any(a[~pos] > 0):
        return math.inf
    with np.errstate(over="ignore"):  # subnormal q entries overflow to a legitimate +inf
        return float(np.sum((a[pos] - b[pos]) ** 2 / b[pos]))


def entropy(p) -> float:
    a = _vec(p)
    a = a[a > 0]
    return float(max(0.0, -np.sum(a * np.log(a))))


def binary_entropy(x: float) -> float:
    return entropy(np.array([x, 1.0 - x]))


def conditional_mutual_information(
    slices: Mapping[object, tuple[float, JointDistribution]] | Iterable[tuple[float, JointDistribution]],
) -> float:
    """E_C[I(X;Y | C=c)] from C-indexed ``(weight, joint)`` slices.

    ``slices`` is either a mapping ``c -> (P(C=c), P_{X,Y|C=c})`` or an
    iterable of such pairs. Weights must sum to one.
    """
    items = list(slices.values()) if isinstance(slices, Mapping) else list(slices)
    weights = np.array([w for w, _ in items], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("slice weights must be a probability vector")
    total = 0.0
    for w, joint in items:
        if w > 0:
            total += w * mutual_information(joint)
    return total
