"""The graph of inequalities between probability metrics.

An edge ``A -> B`` with transform ``g`` asserts ``A(P, Q) <= g(B(P, Q))``.
Edges are fixed; :func:`verify_all` checks all of them on a concrete pair
and :func:`conversion_chain` composes them along shortest paths.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .divergences import chi_squared, hellinger, kl, total_variation
from .errors import NoPath
from .space import Distribution, FiniteMetricSpace
from .transport import (
    DEFAULT_MAX_ITERS,
    DEFAULT_PROKHOROV_CAP,
    bounded_lipschitz,
    prokhorov,
    wasserstein1,
)

METRICS = ("BL", "CHI2", "HL", "KL", "PR", "TV", "W")
SLACK_TOL = 1e-8


@dataclass(frozen=True)
class RelationEdge:
    name: str
    source: str
    target: str
    description: str
    requires_diameter: bool
    citation: str
    _fn: Callable[[float, float], float] = field(repr=False, compare=False)

    def transform(self, x: float, diam: float | None = None) -> float:
        if self.requires_diameter and diam is None:
            raise ValueError(f"edge {self.name} needs the space diameter")
        return self._fn(x, 0.0 if diam is None else diam)


def _scale(c: float, x: float) -> float:
    # 0 * inf = 0: a zero constant kills the term whatever the metric value.
    return 0.0 if c == 0 else c * x


_EDGES = (
    RelationEdge("W_PR", "W", "PR", "x -> (diam+1)*x", True,
                 "Wasserstein vs Prokhorov (Gibbs & Su)", lambda x, d: _scale(d + 1.0, x)),
    RelationEdge("BL_W", "BL", "W", "x -> x", False,
                 "bounded-Lipschitz vs Wasserstein", lambda x, d: x),
    RelationEdge("BL_TV", "BL", "TV", "x -> 2*x", False,
                 "bounded-Lipschitz vs total variation", lambda x, d: 2.0 * x),
    RelationEdge("TV_HL", "TV", "HL", "x -> x", False,
                 "total variation vs Hellinger (Le Cam)", lambda x, d: x),
    RelationEdge("KL_CHI2_LOG", "KL", "CHI2", "x -> log(1+x)", False,
                 "relative entropy vs chi-squared (Gibbs & Su)", lambda x, d: math.log1p(x)),
    RelationEdge("KL_CHI2", "KL", "CHI2", "x -> x", False,
                 "KL <= log(1+chi2) <= chi2", lambda x, d: x),
    RelationEdge("TV_KL", "TV", "KL", "x -> sqrt(x/2)", False,
                 "Pinsker", lambda x, d: math.sqrt(x / 2.0)),
    RelationEdge("W_TV", "W", "TV", "x -> diam*x", True,
                 "W1 <= diam*TV on a bounded space", lambda x, d: _scale(d, x)),
)


def builtin_edges() -> list[RelationEdge]:
    return list(_EDGES)


def edge(name: str) -> RelationEdge:
    for e in _EDGES:
        if e.name == name:
            return e
    raise KeyError(name)


@dataclass(frozen=True)
class SlackReport:
    edge: RelationEdge
    lhs: float
    rhs: float
    slack: float

    @property
    def vacuous(self) -> bool:
        return math.isinf(self.rhs)

    @property
    def holds(self) -> bool:
        return self.slack >= -SLACK_TOL


def all_metrics(
    p: Distribution,
    q: Distribution,
    space: FiniteMetricSpace,
    max_iters: int = DEFAULT_MAX_ITERS,
    prokhorov_cap: int = DEFAULT_PROKHOROV_CAP,
) -> dict[str, float]:
    return {
        "W": wasserstein1(p, q, space, max_iters=max_iters)[0],
        "PR": prokhorov(p, q, space, cap=prokhorov_cap),
        "BL": bounded_lipschitz(p, q, space, max_iters=max_iters),
        "TV": total_variation(p, q),
        "HL": hellinger(p, q),
        "KL": kl(p, q),
        "CHI2": chi_squared(p, q),
    }


def verify_all(
    p: Distribution,
    q: Distribution,
    space: FiniteMetricSpace,
    max_iters: int = DEFAULT_MAX_ITERS,
    prokhorov_cap: int = DEFAULT_PROKHOROV_CAP,
) -> list[SlackReport]:
    values = all_metrics(p, q, space, max_iters=max_iters, prokhorov_cap=prokhorov_cap)
    reports = []
    for e in _EDGES:
        lhs = values[e.source]
        rhs = e.transform(values[e.target], space.diameter)
        slack = math.inf if math.isinf(rhs) else rhs - lhs
        reports.append(SlackReport(e, lhs, rhs, slack))
    return reports


@dataclass(frozen=True)
class ConversionChain:
    """Composite bound ``source <= T(target)`` along a path of edges."""

    source: str
    target: str
    edges: tuple[RelationEdge, ...]
    diam: float | None = None

    def __call__(self, x: float) -> float:
        for e in reversed(self.edges):
            x = e.transform(x, self.diam)
        return x

    @property
    def description(self) -> str:
        if not self.edges:
            return "x -> x"
        return ", then ".join(f"{e.source}->{e.target} [{e.description}]" for e in self.edges)


def conversion_chain(source: str, target: str, diam: float | None = None) -> ConversionChain:
    """Fewest-edge path from ``source`` to ``target``.

    Ties break lexicographically on metric ids, then on builtin edge order.
    """
    for m in (source, target):
        if m not in METRICS:
            raise KeyError(f"unknown metric {m!r}")
    out: dict[str, list[RelationEdge]] = {m: [] for m in METRICS}
    for e in _EDGES:
        out[e.source].append(e)
    prev: dict[str, RelationEdge | None] = {source: None}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        if node == target:
            break
        for e in sorted(out[node], key=lambda e: e.target):
            if e.target not in prev:
                prev[e.target] = e
                queue.append(e.target)
    if target not in prev:
        raise NoPath(f"no chain of relations from {source} to {target}")
    path = []
    node = target
    while prev[node] is not None:
        e = prev[node]
        path.append(e)
        node = e.source
    path.reverse()
    if any(e.requires_diameter for e in path) and diam is None:
        raise ValueError("this chain needs the space diameter")
    return ConversionChain(source, target, tuple(path), diam)
