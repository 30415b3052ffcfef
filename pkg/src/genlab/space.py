"""Finite sets, finite metric spaces, and probability vectors/matrices over them.

Every value here is immutable after construction: arrays are copied and
marked read-only, and validation happens in ``__post_init__`` so that an
invalid object never escapes.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidDistribution, MetricViolation, ParseError

CONSTRUCTION_TOL = 1e-12
MARGINAL_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteSet:
    """A finite set of uniquely labelled points (an instance space, say)."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise DimensionMismatch("labels must be unique")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteSet) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace(FiniteSet):
    """Labelled points with a validated distance matrix and cached diameter."""

    dist: np.ndarray = field(default=None)
    diameter: float = field(init=False, default=0.0)

    def __post_init__(self):
        super().__post_init__()
        d = np.asarray(self.dist, dtype=float)
        n = len(self.labels)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got shape {d.shape}")
        if d.shape[0] != n:
            raise DimensionMismatch(f"{n} labels but a {d.shape[0]}x{d.shape[0]} distance matrix")
        _check_metric(d)
        object.__setattr__(self, "dist", _frozen(d))
        object.__setattr__(self, "diameter", float(d.max()) if n else 0.0)
        off = d[~np.eye(n, dtype=bool)]
        if off.size and np.any(off == 0.0):
            warnings.warn(
                "distinct points at distance 0: this is a pseudometric and W1 "
                "loses identity of indiscernibles",
                stacklevel=3,
            )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteMetricSpace)
            and self.labels == other.labels
            and np.array_equal(self.dist, other.dist)
        )

    def __hash__(self) -> int:
        return hash(self.labels)


def _check_metric(d: np.ndarray) -> None:
    if not np.all(np.isfinite(d)):
        i, j = np.argwhere(~np.isfinite(d))[0]
        raise MetricViolation("finiteness", (int(i), int(j)))
    if np.any(d < 0):
        i, j = np.argwhere(d < 0)[0]
        raise MetricViolation("nonnegativity", (int(i), int(j)))
    diag = np.abs(np.diag(d))
    if np.any(diag > CONSTRUCTION_TOL):
        i = int(np.argmax(diag))
        raise MetricViolation("identity", (i, i), f"d[{i}][{i}] = {d[i, i]}")
    asym = np.abs(d - d.T)
    if np.any(asym > CONSTRUCTION_TOL):
        i, j = np.argwhere(asym > CONSTRUCTION_TOL)[0]
        raise MetricViolation("symmetry", (int(i), int(j)), f"{d[i, j]} != {d[j, i]}")
    # excess[i, j, k] = d[i, k] - d[i, j] - d[j, k]
    excess = d[:, None, :] - d[:, :, None] - d[None, :, :]
    if np.any(excess > CONSTRUCTION_TOL):
        i, j, k = np.argwhere(excess > CONSTRUCTION_TOL)[0]
        raise MetricViolation("triangle", (int(i), int(j), int(k)))


def build_space(labels: Sequence, dist) -> FiniteMetricSpace:
    return FiniteMetricSpace(tuple(labels), np.asarray(dist, dtype=float))


def plain_set(size_or_labels) -> FiniteSet:
    if isinstance(size_or_labels, int):
        return FiniteSet(tuple(range(size_or_labels)))
    return FiniteSet(tuple(size_or_labels))


def line_space(points: Sequence[float], labels: Sequence | None = None) -> FiniteMetricSpace:
    """Points on the real line with d(x, y) = |x - y|."""
    x = np.asarray(points, dtype=float)
    labels = tuple(range(len(x))) if labels is None else tuple(labels)
    return build_space(labels, np.abs(x[:, None] - x[None, :]))


def discrete_space(n: int, scale: float = 1.0) -> FiniteMetricSpace:
    """n points at mutual distance ``scale``."""
    return build_space(range(n), scale * (1.0 - np.eye(n)))


def _check_probs(probs: np.ndarray) -> None:
    if not np.all(np.isfinite(probs)):
        raise InvalidDistribution("probabilities must be finite")
    if np.any(probs < 0):
        raise InvalidDistribution(f"negative probability {probs.min()}")
    total = probs.sum()
    if abs(total - 1.0) > CONSTRUCTION_TOL:
        raise InvalidDistribution(f"probabilities sum to {total!r}, not 1")


@dataclass(frozen=True, eq=False)
class Distribution:
    space: FiniteSet
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.shape[0] != len(self.space):
            raise DimensionMismatch(
                f"probability vector of shape {p.shape} on a space of {len(self.space)} points"
            )
        _check_probs(p)
        object.__setattr__(self, "probs", _frozen(p))

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, i):
        return self.probs[i]


@dataclass(frozen=True, eq=False)
class JointDistribution:
    row_space: FiniteSet
    col_space: FiniteSet
    probs: np.ndarray
    # Set only for product joints, whose marginals are then returned exactly.
    factors: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(self.row_space), len(self.col_space)):
            raise DimensionMismatch(
                f"joint of shape {p.shape} over {len(self.row_space)}x{len(self.col_space)} spaces"
            )
        _check_probs(p)
        object.__setattr__(self, "probs", _frozen(p))

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape

    def row_marginal(self) -> Distribution:
        if self.factors is not None:
            return self.factors[0]
        return Distribution(self.row_space, _cleanup(self.probs.sum(axis=1)))

    def col_marginal(self) -> Distribution:
        if self.factors is not None:
            return self.factors[1]
        return Distribution(self.col_space, _cleanup(self.probs.sum(axis=0)))

    def transpose(self) -> "JointDistribution":
        factors = None if self.factors is None else self.factors[::-1]
        return JointDistribution(self.col_space, self.row_space, self.probs.T, factors)


def _cleanup(v: np.ndarray) -> np.ndarray:
    # Row/column sums of a valid joint can drift by a few ulps from total mass 1.
    return np.clip(v, 0.0, None)


@dataclass(frozen=True, eq=False)
class Coupling:
    """A joint distribution whose marginals match ``target_p`` and ``target_q``."""

    joint: JointDistribution
    target_p: Distribution
    target_q: Distribution

    def __post_init__(self):
        rows = self.joint.probs.sum(axis=1)
        cols = self.joint.probs.sum(axis=0)
        if rows.shape != self.target_p.probs.shape or cols.shape != self.target_q.probs.shape:
            raise DimensionMismatch("coupling shape does not match its target marginals")
        err_p = np.max(np.abs(rows - self.target_p.probs), initial=0.0)
        err_q = np.max(np.abs(cols - self.target_q.probs), initial=0.0)
        if err_p > MARGINAL_TOL or err_q > MARGINAL_TOL:
            raise InvalidDistribution(
                f"coupling marginals off by {max(err_p, err_q):.3g} (tolerance {MARGINAL_TOL})"
            )

    @property
    def probs(self) -> np.ndarray:
        return self.joint.probs


def product_distribution(p: Distribution, q: Distribution) -> JointDistribution:
    return JointDistribution(p.space, q.space, np.outer(p.probs, q.probs), (p, q))


def marginals(j: JointDistribution) -> tuple[Distribution, Distribution]:
    return j.row_marginal(), j.col_marginal()


def point_mass(space: FiniteSet, index: int) -> Distribution:
    p = np.zeros(len(space))
    p[index] = 1.0
    return Distribution(space, p)


def uniform(space: FiniteSet) -> Distribution:
    n = len(space)
    return Distribution(space, np.full(n, 1.0 / n))


def normalized(space: FiniteSet, weights) -> Distribution:
    """Distribution proportional to nonnegative ``weights``.

    The largest entry absorbs the rounding residue so the mass check passes
    for vectors produced by arithmetic (means of samples, matrix products).
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
        raise InvalidDistribution("weights must be finite, nonnegative and not all zero")
    p = w / w.sum()
    k = int(np.argmax(p))
    p[k] = 0.0
    p[k] = 1.0 - p.sum()
    return Distribution(space, p)


# --- JSON ------------------------------------------------------------------


def _reject_constant(name: str):
    raise ParseError(f"non-finite JSON constant {name} is not allowed")


def loads(text: str) -> Any:
    """Parse JSON, rejecting NaN and Infinity literals."""
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc


def load_json(path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _finite_array(values, name: str, ndim: int) -> np.ndarray:
    try:
        a = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"'{name}' is not numeric: {exc}") from exc
    if a.ndim != ndim:
        raise ParseError(f"'{name}' must be {ndim}-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParseError(f"'{name}' contains NaN or Inf")
    if np.any(a < 0):
        raise ParseError(f"'{name}' contains negative entries")
    return a


def _labels(obj: dict, size: int) -> tuple:
    if "labels" not in obj:
        return tuple(range(size))
    return tuple(tuple(x) if isinstance(x, list) else x for x in obj["labels"])


def space_from_json(obj: dict) -> FiniteMetricSpace:
    """Build a space from ``{"labels": [...], "dist": [[...]]}``."""
    if not isinstance(obj, dict) or "dist" not in obj:
        raise ParseError("space object needs a 'dist' matrix")
    d = _finite_array(obj["dist"], "dist", 2)
    try:
        return build_space(_labels(obj, d.shape[0]), d)
    except (MetricViolation, DimensionMismatch) as exc:
        raise ParseError(str(exc)) from exc


def space_to_json(space: FiniteMetricSpace) -> dict:
    return {"labels": list(space.labels), "dist": space.dist.tolist()}


def distribution_from_json(obj: dict, space: FiniteSet | None = None) -> Distribution:
    """Build a distribution from ``{"probs": [...]}``; labels/dist may ride along."""
    if not isinstance(obj, dict) or "probs" not in obj:
        raise ParseError("distribution object needs a 'probs' vector")
    p = _finite_array(obj["probs"], "probs", 1)
    if space is None:
        space = space_from_json(obj) if "dist" in obj else FiniteSet(_labels(obj, len(p)))
    try:
        return Distribution(space, p)
    except (InvalidDistribution, DimensionMismatch) as exc:
        raise ParseError(str(exc)) from exc


def joint_from_json(obj: dict) -> JointDistribution:
    """Build a joint from ``{"probs": [[...]]}`` (row/column labels optional)."""
    if not isinstance(obj, dict) or "probs" not in obj:
        raise ParseError("joint object needs a 'probs' matrix")
    p = _finite_array(obj["probs"], "probs", 2)
    rows = tuple(obj.get("row_labels", range(p.shape[0])))
    cols = tuple(obj.get("col_labels", range(p.shape[1])))
    try:
        return JointDistribution(FiniteSet(rows), FiniteSet(cols), p)
    except (InvalidDistribution, DimensionMismatch) as exc:
        raise ParseError(str(exc)) from exc


def check_same_support(p, q) -> None:
    sp = getattr(p, "space", None)
    sq = getattr(q, "space", None)
    if sp is not None and sq is not None and sp.labels != sq.labels:
        raise DimensionMismatch("distributions live on different spaces")
    if np.shape(getattr(p, "probs", p)) != np.shape(getattr(q, "probs", q)):
        raise DimensionMismatch("distributions have different shapes")


def check_on_space(p: Distribution, space: FiniteMetricSpace) -> None:
    if p.space.labels != space.labels:
        raise DimensionMismatch("distribution is not defined on the given space")

