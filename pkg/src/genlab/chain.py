"""Stochastic channels, contraction coefficients, and depth-dependent bounds.

A stack of noisy layers is a Markov chain X -> Y_1 -> ... -> Y_H of
channels. For each layer the Dobrushin coefficient (largest total variation
between two rows) upper-bounds its mutual-information contraction factor,
so information about X decays at least geometrically in depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .divergences import mutual_information
from .errors import DimensionMismatch, InvalidDistribution
from .space import Distribution, FiniteSet, JointDistribution, normalized, plain_set

SLACK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix ``rows[x, y] = K(y | x)``."""

    in_space: FiniteSet
    out_space: FiniteSet
    rows: np.ndarray

    def __post_init__(self):
        k = np.array(self.rows, dtype=float)
        if k.shape != (len(self.in_space), len(self.out_space)):
            raise DimensionMismatch(f"channel matrix of shape {k.shape}")
        if not np.all(np.isfinite(k)) or np.any(k < 0):
            raise InvalidDistribution("channel entries must be finite and nonnegative")
        if np.max(np.abs(k.sum(axis=1) - 1.0), initial=0.0) > 1e-12:
            raise InvalidDistribution("every channel row must sum to 1")
        k.setflags(write=False)
        object.__setattr__(self, "rows", k)


def channel(rows) -> Channel:
    k = np.asarray(rows, dtype=float)
    return Channel(plain_set(k.shape[0]), plain_set(k.shape[1]), k)


def bsc(p: float) -> Channel:
    """Binary symmetric channel with crossover probability ``p``."""
    return channel([[1.0 - p, p], [p, 1.0 - p]])


def binary_erasure(e: float) -> Channel:
    """Binary input, outputs (0, 1, erased)."""
    return Channel(plain_set(2), FiniteSet((0, 1, "e")), [[1.0 - e, 0.0, e], [0.0, 1.0 - e, e]])


def identity_channel(n: int) -> Channel:
    return channel(np.eye(n))


def constant_channel(n_in: int, out_probs: Sequence[float]) -> Channel:
    return channel(np.tile(np.asarray(out_probs, dtype=float), (n_in, 1)))


def random_channel(rng: np.random.Generator, n_in: int, n_out: int, floor: float = 0.05) -> Channel:
    """Full-support channel from normalised positive uniform draws."""
    w = rng.uniform(floor, 1.0, size=(n_in, n_out))
    rows = w / w.sum(axis=1, keepdims=True)
    rows[:, -1] = 1.0 - rows[:, :-1].sum(axis=1)
    return channel(rows)


def dobrushin(k: Channel) -> float:
    """max over input pairs of TV(row_x, row_x')."""
    r = k.rows
    if r.shape[0] < 2:
        return 0.0
    tv = 0.5 * np.abs(r[:, None, :] - r[None, :, :]).sum(axis=2)
    return float(min(1.0, tv.max()))


def compose(k1: Channel, k2: Channel) -> Channel:
    """X -> Y -> Z as a single channel X -> Z."""
    if k1.out_space.labels != k2.in_space.labels:
        raise DimensionMismatch("first channel's outputs are not the second's inputs")
    rows = k1.rows @ k2.rows
    rows = rows / rows.sum(axis=1, keepdims=True)
    return Channel(k1.in_space, k2.out_space, rows)


def push(p: Distribution, k: Channel) -> Distribution:
    _check_input(p, k)
    return normalized(k.out_space, p.probs @ k.rows)


def joint_through(p: Distribution, k: Channel) -> JointDistribution:
    _check_input(p, k)
    return JointDistribution(k.in_space, k.out_space, p.probs[:, None] * k.rows)


def _check_input(p: Distribution, k: Channel) -> None:
    if p.space.labels != k.in_space.labels:
        raise DimensionMismatch("distribution is not over the channel's input space")


@dataclass(frozen=True)
class SdpiCheck:
    i_xy: float
    i_xz: float
    eta_tv: float
    holds: bool
    dpi_holds: bool

    @property
    def ratio(self) -> float:
        """Empirical contraction I(X;Z)/I(X;Y), for context only."""
        return self.i_xz / self.i_xy if self.i_xy > 0 else math.nan


def sdpi_check(prior: Distribution, k1: Channel, k2: Channel) -> SdpiCheck:
    """Check I(X;Z) <= I(X;Y) and I(X;Z) <= eta_TV(k2) I(X;Y) on X -> Y -> Z."""
    i_xy = mutual_information(joint_through(prior, k1))
    i_xz = mutual_information(joint_through(prior, compose(k1, k2)))
    eta = dobrushin(k2)
    return SdpiCheck(i_xy, i_xz, eta, i_xz <= eta * i_xy + SLACK_TOL, i_xz <= i_xy + SLACK_TOL)


@dataclass(frozen=True)
class ContractionReport:
    eta_tv: float
    per_layer: tuple[float, ...]
    eta_geo_mean: float


def contraction_report(layers: Sequence[Channel]) -> ContractionReport:
    if not layers:
        raise ValueError("need at least one layer")
    per = tuple(dobrushin(k) for k in layers)
    total = layers[0]
    for k in layers[1:]:
        total = compose(total, k)
    return ContractionReport(dobrushin(total), per, _geo_mean(per))


def _geo_mean(etas: Sequence[float]) -> float:
    prod = float(np.prod(etas))
    return prod ** (1.0 / len(etas))


def depth_decay(prior: Distribution, layers: Sequence[Channel]) -> tuple[list[float], ContractionReport]:
    """I(X; Y_k) for k = 1..H along the stack, plus per-layer contraction."""
    if not layers:
        raise ValueError("need at least one layer")
    mi = []
    total = None
    for k in layers:
        total = k if total is None else compose(total, k)
        mi.append(mutual_information(joint_through(prior, total)))
    return mi, contraction_report(layers)


def eta_product_bounds(mi_seq: Sequence[float], per_layer: Sequence[float]) -> list[float]:
    """(prod_{i=2}^{k} eta_i) * I(X; Y_1) for each depth k."""
    out = []
    prod = 1.0
    for k, _ in enumerate(mi_seq):
        if k > 0:
            prod *= per_layer[k]
        out.append(prod * mi_seq[0])
    return out


def thm7_bound(K: float, R: float, H: int, eta: float, mi_wsn: float, n: int) -> float:
    """eta^(H/2) * sqrt(K^2 R^2 I(S_n; W) / 2n)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"contraction coefficient must lie in [0, 1], got {eta}")
    if H < 0 or n < 1 or mi_wsn < 0:
        raise ValueError("need H >= 0, n >= 1 and nonnegative mutual information")
    base = math.sqrt(K * K * R * R * mi_wsn / (2.0 * n))
    if H == 0:
        return base
    return eta ** (H / 2.0) * base


def expected_eta(weighted_chains: Sequence[tuple[float, Sequence[Channel]]]) -> float:
    """(E_w[prod_i eta_i])^(1/H) over weight configurations, each a fixed layer stack."""
    weights = np.array([w for w, _ in weighted_chains], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("chain weights must be a probability vector")
    depths = {len(layers) for _, layers in weighted_chains}
    if len(depths) != 1 or 0 in depths:
        raise ValueError("all chains need the same positive depth")
    H = depths.pop()
    mean_prod = sum(w * float(np.prod([dobrushin(k) for k in layers])) for w, layers in weighted_chains)
    return mean_prod ** (1.0 / H)


@dataclass(frozen=True)
class DepthBoundReport:
    eta: float
    bound: float
    depth: int
    mi_seq: list[float] = field(default_factory=list)
    contraction: ContractionReport | None = None


def thm7_pipeline(prior: Distribution, layers: Sequence[Channel], K: float, R: float, mi_wsn: float,
                  n: int) -> DepthBoundReport:
    mi_seq, report = depth_decay(prior, layers)
    eta = report.eta_geo_mean
    return DepthBoundReport(eta, thm7_bound(K, R, len(layers), eta, mi_wsn, n), len(layers), mi_seq, report)
