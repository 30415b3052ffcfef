"""Generalization bounds evaluated against the exact generalization error.

Every bound is computed from the same :class:`Analysis` so that the
enumeration over datasets happens once per (problem, kernel) pair.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .config import DEFAULT_SETTINGS, Settings
from .divergences import chi_squared, hellinger, total_variation
from .errors import EnumerationCapExceeded
from .learner import (
    AlgorithmKernel,
    DerivedDistributions,
    LearningProblem,
    ProblemConstants,
    algorithmic_transport_cost,
    derive_distributions,
    expected_bl_cost,
    expected_generalization_error,
    expected_prokhorov_cost,
    problem_constants,
)
from .space import FiniteSet, Distribution, build_space

VALIDITY_TOL = 1e-9

LIPSCHITZ = "lipschitz"
BOUNDED = "bounded"
BOUNDED_LIPSCHITZ = "bounded_lipschitz"
BOUNDED_SPACE = "bounded_space"


def _scale(c: float, x: float) -> float:
    # A zero constant means the loss cannot tell hypotheses apart: bound is 0.
    return 0.0 if c == 0 else c * x


def _sqrt_ratio(num: float, den: float) -> float:
    return math.inf if math.isinf(num) else math.sqrt(max(num, 0.0) / den)


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    assumptions: dict
    true_gen_error: float
    valid: bool | None

    @property
    def applicable(self) -> bool:
        return all(self.assumptions.values())

    @property
    def vacuous(self) -> bool:
        return math.isinf(self.value)

    @property
    def slack(self) -> float:
        return self.value - self.true_gen_error


def _report(name: str, value: float, assumptions: dict, gen: float) -> BoundReport:
    if not all(assumptions.values()):
        return BoundReport(name, math.nan, assumptions, gen, None)
    return BoundReport(name, value, assumptions, gen, bool(gen <= value + VALIDITY_TOL))


class Analysis:
    """Lazily computed quantities shared by all bounds for one (problem, kernel)."""

    def __init__(self, problem: LearningProblem, kernel: AlgorithmKernel, settings: Settings = DEFAULT_SETTINGS):
        self.problem = problem
        self.kernel = kernel
        self.settings = settings

    @cached_property
    def derived(self) -> DerivedDistributions:
        return derive_distributions(self.problem, self.kernel, self.settings)

    @cached_property
    def constants(self) -> ProblemConstants:
        return problem_constants(self.problem, allow_infinite=True)

    @cached_property
    def assumptions(self) -> dict:
        c = self.constants
        return {
            LIPSCHITZ: math.isfinite(c.K),
            BOUNDED: math.isfinite(c.F),
            BOUNDED_LIPSCHITZ: math.isfinite(c.G),
            BOUNDED_SPACE: math.isfinite(c.diam),
        }

    def needs(self, *names: str) -> dict:
        return {k: self.assumptions[k] for k in names}

    @cached_property
    def gen_error(self) -> float:
        return expected_generalization_error(self.problem, self.kernel, self.derived, self.settings)

    @cached_property
    def transport_cost(self) -> float:
        return algorithmic_transport_cost(self.problem, self.kernel, self.derived, self.settings)

    @cached_property
    def bl_cost(self) -> float:
        return expected_bl_cost(self.problem, self.kernel, self.derived, self.settings)

    @cached_property
    def prokhorov_cost(self) -> float:
        return expected_prokhorov_cost(self.problem, self.kernel, self.derived, self.settings)

    @cached_property
    def tv_joint(self) -> float:
        """TV(P_W x D, P_{W,z})."""
        return total_variation(self.derived.product_w_z, self.derived.p_wz.probs)

    @cached_property
    def hl_joint(self) -> float:
        return hellinger(self.derived.product_w_z, self.derived.p_wz.probs)

    @cached_property
    def mi(self) -> float:
        return self.derived.mi_w_sn

    @cached_property
    def chi2_sample(self) -> float:
        """chi^2(P_{S_n,W} || P_{S_n} x P_W) over the enumerated datasets."""
        joint = self.derived.p_sn_w.probs
        prod = np.outer(joint.sum(axis=1), joint.sum(axis=0))
        return chi_squared(joint, prod)

    @cached_property
    def log1p_chi2(self) -> float:
        return math.log1p(self.chi2_sample)


def _analysis(problem, kernel, settings) -> Analysis:
    return Analysis(problem, kernel, settings)


# --- headline bounds ----------------------------------------------------------------


def _thm1(a: Analysis) -> float:
    return _scale(a.constants.K, a.transport_cost)


def _thm2(a: Analysis) -> float:
    c = a.constants
    return _scale(c.K * c.diam, a.tv_joint)


def _thm3(a: Analysis) -> float:
    return _scale(2.0 * a.constants.F, a.tv_joint)


def _thm4(a: Analysis) -> float:
    c = a.constants
    return _scale(c.K * c.diam, _sqrt_ratio(a.mi, 2.0 * a.problem.n))


def _thm5(a: Analysis) -> float:
    return _scale(a.constants.G, a.bl_cost)


def thm1_bound(problem, kernel, settings: Settings = DEFAULT_SETTINGS) -> float:
    """K * E_z[W1(P_W, P_{W|z})]."""
    return _thm1(_analysis(problem, kernel, settings))


def thm2_bound(problem, kernel, settings: Settings = DEFAULT_SETTINGS) -> float:
    """K * diam * TV(P_W x D, P_{W,z})."""
    return _thm2(_analysis(problem, kernel, settings))


def thm3_bound(problem, kernel, settings: Settings = DEFAULT_SETTINGS) -> float:
    """2F * TV(P_W x D, P_{W,z})."""
    return _thm3(_analysis(problem, kernel, settings))


def thm4_bound(problem, kernel, settings: Settings = DEFAULT_SETTINGS) -> float:
    """K * diam * sqrt(I(W; S_n) / 2n); +inf when the information is infinite."""
    return _thm4(_analysis(problem, kernel, settings))


def thm5_bound(problem, kernel, settings: Settings = DEFAULT_SETTINGS) -> float:
    """G * E_z[BL(P_W, P_{W|z})]."""
    return _thm5(_analysis(problem, kernel, settings))


# --- corollaries --------------------------------------------------------------------------


def lipschitz_family(K: float, diam: float, n: int, prokhorov_cost: float, hl_joint: float,
                     log1p_chi2: float) -> dict[str, float]:
    return {
        "cor1_prokhorov": _scale(K * (diam + 1.0), prokhorov_cost),
        "cor1_hellinger": _scale(K * diam, hl_joint),
        "cor1_chi2": _scale(K * diam, _sqrt_ratio(log1p_chi2, 2.0 * n)),
    }


def bounded_family(F: float, n: int, mi: float, hl_joint: float, log1p_chi2: float) -> dict[str, float]:
    return {
        "cor2_mi": _scale(F, _sqrt_ratio(2.0 * mi, n)),
        "cor2_hellinger": _scale(2.0 * F, hl_joint),
        "cor2_chi2": _scale(F, _sqrt_ratio(2.0 * log1p_chi2, n)),
    }


def bounded_lipschitz_family(G: float, diam: float, n: int, transport_cost: float, tv_joint: float,
                             prokhorov_cost: float, mi: float, hl_joint: float,
                             log1p_chi2: float) -> dict[str, float]:
    return {
        "cor3_transport": _scale(G, transport_cost),
        "cor3_tv": _scale(2.0 * G, tv_joint),
        "cor3_prokhorov": _scale(G * (diam + 1.0), prokhorov_cost),
        "cor3_mi": _scale(2.0 * G, _sqrt_ratio(2.0 * mi, n)),
        "cor3_hellinger": _scale(2.0 * G, hl_joint),
        "cor3_chi2": _scale(2.0 * G, _sqrt_ratio(2.0 * log1p_chi2, n)),
    }


def _corollaries(a: Analysis) -> list[BoundReport]:
    c, n, gen = a.constants, a.problem.n, a.gen_error
    reports = []
    lip = a.needs(LIPSCHITZ, BOUNDED_SPACE)
    if all(lip.values()):
        vals = lipschitz_family(c.K, c.diam, n, a.prokhorov_cost, a.hl_joint, a.log1p_chi2)
    else:
        vals = dict.fromkeys(("cor1_prokhorov", "cor1_hellinger", "cor1_chi2"), math.nan)
    reports += [_report(k, v, lip, gen) for k, v in vals.items()]

    bnd = a.needs(BOUNDED)
    vals = bounded_family(c.F, n, a.mi, a.hl_joint, a.log1p_chi2)
    reports += [_report(k, v, bnd, gen) for k, v in vals.items()]

    bl = a.needs(BOUNDED_LIPSCHITZ, BOUNDED_SPACE)
    if all(bl.values()):
        vals = bounded_lipschitz_family(c.G, c.diam, n, a.transport_cost, a.tv_joint, a.prokhorov_cost,
                                        a.mi, a.hl_joint, a.log1p_chi2)
    else:
        vals = dict.fromkeys(("cor3_transport", "cor3_tv", "cor3_prokhorov", "cor3_mi", "cor3_hellinger",
                              "cor3_chi2"), math.nan)
    reports += [_report(k, v, bl, gen) for k, v in vals.items()]
    return reports


def corollary_bounds(problem, kernel, settings: Settings = DEFAULT_SETTINGS) -> list[BoundReport]:
    """The twelve corollary bounds, each tagged with the assumptions it needs."""
    return _corollaries(_analysis(problem, kernel, settings))


# --- VC machinery ---------------------------------------------------------------------


class HypothesisClass:
    """Binary classifiers on a finite feature set, one row of 0/1 predictions each.

    Duplicate rows are collapsed (first occurrence kept) with a warning.
    """

    def __init__(self, predictions, features: Sequence | None = None):
        h = np.asarray(predictions)
        if h.ndim != 2 or not np.all((h == 0) | (h == 1)):
            raise ValueError("predictions must be a 0/1 matrix")
        h = h.astype(np.int8)
        _, first = np.unique(h, axis=0, return_index=True)
        keep = np.sort(first)
        if keep.size < h.shape[0]:
            warnings.warn(f"collapsed {h.shape[0] - keep.size} duplicate hypotheses", stacklevel=2)
        h = h[keep]
        h.setflags(write=False)
        self.predictions = h
        self.features = tuple(range(h.shape[1])) if features is None else tuple(features)
        if len(self.features) != h.shape[1]:
            raise ValueError("feature labels do not match the prediction matrix")

    @property
    def size(self) -> int:
        return self.predictions.shape[0]

    @property
    def n_features(self) -> int:
        return self.predictions.shape[1]

    def patterns(self, points: Sequence[int]) -> int:
        """Number of distinct restrictions of the class to ``points``."""
        sub = self.predictions[:, list(points)]
        return int(np.unique(sub, axis=0).shape[0])


def threshold_class(m: int) -> HypothesisClass:
    """x -> 1[x >= t] on points 0..m-1, for t = 0..m."""
    x = np.arange(m)
    return HypothesisClass((x[None, :] >= np.arange(m + 1)[:, None]).astype(int))


def interval_class(m: int) -> HypothesisClass:
    """Indicators of [a, b] on points 0..m-1, plus the empty interval."""
    x = np.arange(m)
    rows = [np.zeros(m, dtype=int)]
    rows += [((x >= a) & (x <= b)).astype(int) for a in range(m) for b in range(a, m)]
    return HypothesisClass(rows)


def full_class(m: int) -> HypothesisClass:
    return HypothesisClass(np.array(list(itertools.product((0, 1), repeat=m))))


def growth_function(hclass: HypothesisClass, n: int) -> int:
    """max over n points of the number of distinct labelings.

    For n <= |X| the max runs over sets of n distinct points; beyond that an
    n-tuple can cover all of X, so the count on X itself is the maximum.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    m = hclass.n_features
    if n == 0:
        return 1
    if n >= m:
        return hclass.patterns(range(m))
    return max(hclass.patterns(c) for c in itertools.combinations(range(m), n))


def vc_dimension(hclass: HypothesisClass, cap: int = DEFAULT_SETTINGS.vc_cap) -> int:
    m = hclass.n_features
    if m > cap:
        raise EnumerationCapExceeded(m, cap)
    d = 0
    limit = min(m, int(math.floor(math.log2(hclass.size))))
    for k in range(1, limit + 1):
        if any(hclass.patterns(c) == 2**k for c in itertools.combinations(range(m), k)):
            d = k
        else:
            break
    return d


def sauer_bound(d: int, n: int) -> float:
    """2^n if n < d, else (e n / d)^d."""
    if d < 1 or n < 1:
        raise ValueError("Sauer bound needs d >= 1 and n >= 1")
    if n < d:
        return float(2**n)
    return (math.e * n / d) ** d


def log_plus(x: float) -> float:
    return max(1.0, math.log(x))


def thm6_bound(d: int, n: int) -> float:
    """sqrt(2 d log+(n e / d) / n), natural log."""
    if d < 1 or n < 1:
        raise ValueError("the VC bound needs d >= 1 and n >= 1")
    return math.sqrt(2.0 * d * log_plus(n * math.e / d) / n)


def classification_problem(hclass: HypothesisClass, n: int, data_dist: Sequence[float] | None = None,
                           hamming_scale: float = 1.0) -> LearningProblem:
    """Binary classification with 0-1 loss: instances are (x, y) pairs.

    Hypotheses carry the Hamming distance between their prediction rows.
    ``data_dist`` is over the (x, y) pairs in order (x-major); uniform by default.
    """
    h = hclass.predictions
    instances = FiniteSet(tuple((x, y) for x in hclass.features for y in (0, 1)))
    loss = np.array([[float(h[w, i] != y) for i in range(hclass.n_features) for y in (0, 1)]
                     for w in range(hclass.size)])
    ham = hamming_scale * (h[:, None, :] != h[None, :, :]).sum(axis=2)
    hyp = build_space(range(hclass.size), ham.astype(float))
    d = np.full(len(instances), 1.0 / len(instances)) if data_dist is None else data_dist
    return LearningProblem(instances, hyp, loss, Distribution(instances, d), n, hypothesis_class=hclass)


def _thm6_report(a: Analysis) -> BoundReport:
    p = a.problem
    hclass = p.hypothesis_class
    d = vc_dimension(hclass, a.settings.vc_cap)
    assumptions = {
        "binary_classification": True,
        "zero_one_loss": bool(np.all((p.loss == 0) | (p.loss == 1))),
        "empirical_risk_algorithm": a.kernel.name == "erm",
        "finite_vc_dimension": d >= 1,
    }
    value = thm6_bound(d, p.n) if d >= 1 else math.nan
    return _report("thm6_vc", value, assumptions, a.gen_error)


# --- aggregation -----------------------------------------------------------------------


def evaluate_all(problem: LearningProblem, kernel: AlgorithmKernel,
                 settings: Settings = DEFAULT_SETTINGS) -> list[BoundReport]:
    """Every applicable-or-flagged bound, sorted by name, sharing one true error."""
    a = _analysis(problem, kernel, settings)
    gen = a.gen_error
    lip = a.needs(LIPSCHITZ)
    lip_space = a.needs(LIPSCHITZ, BOUNDED_SPACE)
    reports = [
        _report("thm1_transport", _thm1(a) if all(lip.values()) else math.nan, lip, gen),
        _report("thm2_tv_lipschitz", _thm2(a) if all(lip_space.values()) else math.nan, lip_space, gen),
        _report("thm3_tv_bounded", _thm3(a), a.needs(BOUNDED), gen),
        _report("thm4_mi", _thm4(a) if all(lip_space.values()) else math.nan, lip_space, gen),
        _report("thm5_bl", _thm5(a) if a.assumptions[BOUNDED_LIPSCHITZ] else math.nan,
                a.needs(BOUNDED_LIPSCHITZ), gen),
    ]
    reports += _corollaries(a)
    if problem.hypothesis_class is not None:
        reports.append(_thm6_report(a))
    return sorted(reports, key=lambda r: r.name)
