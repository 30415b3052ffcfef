"""Learning problems on finite spaces and learning algorithms as Markov kernels.

A dataset is an ordered n-tuple of instance indices drawn from D^n. An
algorithm maps datasets to distributions over the hypothesis space; every
downstream quantity (the hypothesis marginal, the joint of the hypothesis
with one uniformly chosen training example, mutual informations, the exact
expected generalization error) is an exact finite sum over the enumerated
datasets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Any, Callable, Iterator, Sequence

import numpy as np

from .config import DEFAULT_SETTINGS, Settings
from .divergences import mutual_information, total_variation
from .errors import DimensionMismatch, EnumerationCapExceeded, InvalidDistribution, ParseError, ZeroDistance
from .space import (
    Distribution,
    FiniteMetricSpace,
    FiniteSet,
    JointDistribution,
    distribution_from_json,
    normalized,
    space_from_json,
)
from .transport import bounded_lipschitz, prokhorov, wasserstein1

if TYPE_CHECKING:
    from .bounds import HypothesisClass

IDENTITY_TOL = 1e-10
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LearningProblem:
    """Loss matrix ``loss[w][z]``, data distribution D over instances, sample size n."""

    instances: FiniteSet
    hypotheses: FiniteMetricSpace
    loss: np.ndarray
    data_dist: Distribution
    n: int
    hypothesis_class: "HypothesisClass | None" = None

    def __post_init__(self):
        loss = np.array(self.loss, dtype=float)
        if loss.shape != (len(self.hypotheses), len(self.instances)):
            raise DimensionMismatch(
                f"loss has shape {loss.shape}, expected "
                f"({len(self.hypotheses)}, {len(self.instances)}) = (|W|, |Z|)"
            )
        if not np.all(np.isfinite(loss)) or np.any(loss < 0):
            raise InvalidDistribution("loss entries must be finite and nonnegative")
        if self.data_dist.space.labels != self.instances.labels:
            raise DimensionMismatch("data distribution is not over the instance space")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"sample size must be a positive integer, got {self.n!r}")
        loss.setflags(write=False)
        object.__setattr__(self, "loss", loss)
        object.__setattr__(self, "n", int(self.n))

    @property
    def n_instances(self) -> int:
        return len(self.instances)

    @property
    def n_hypotheses(self) -> int:
        return len(self.hypotheses)

    def population_risk(self) -> np.ndarray:
        """R(w) for every hypothesis."""
        return self.loss @ self.data_dist.probs

    def empirical_risk(self, counts: np.ndarray) -> np.ndarray:
        """R_S(w) for datasets given as rows of instance counts."""
        return (counts / self.n) @ self.loss.T


# --- kernels -------------------------------------------------------------------


@dataclass(frozen=True)
class AlgorithmKernel:
    """A learning algorithm P_{W|S_n}.

    ``batch`` maps an ``(N, n)`` integer array of datasets to an ``(N, |W|)``
    array whose rows are distributions over hypotheses.
    """

    name: str
    batch: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    permutation_invariant: bool = False
    params: dict = field(default_factory=dict)

    def __call__(self, dataset: Sequence[int]) -> np.ndarray:
        return self.batch(np.asarray(dataset, dtype=np.int64).reshape(1, -1))[0]


def kernel_from_function(
    name: str, fn: Callable[[tuple], Sequence[float]], permutation_invariant: bool = False
) -> AlgorithmKernel:
    """Wrap a per-dataset function ``tuple -> distribution over W``."""

    def batch(datasets: np.ndarray) -> np.ndarray:
        return np.array([np.asarray(fn(tuple(int(z) for z in s)), dtype=float) for s in datasets])

    return AlgorithmKernel(name, batch, permutation_invariant)


def _counts(problem: LearningProblem, datasets: np.ndarray) -> np.ndarray:
    return (datasets[:, :, None] == np.arange(problem.n_instances)).sum(axis=1).astype(float)


def constant_kernel(problem: LearningProblem, probs: Sequence[float] | None = None) -> AlgorithmKernel:
    """Ignores the data; outputs ``probs`` (uniform by default)."""
    k = problem.n_hypotheses
    out = np.full(k, 1.0 / k) if probs is None else Distribution(problem.hypotheses, probs).probs.copy()

    def batch(datasets):
        return np.tile(out, (len(datasets), 1))

    return AlgorithmKernel("constant", batch, True, {"probs": out.tolist()})


def erm_kernel(problem: LearningProblem) -> AlgorithmKernel:
    """Deterministic empirical risk minimiser; ties go to the lowest hypothesis index."""

    def batch(datasets):
        risk = problem.empirical_risk(_counts(problem, datasets))
        best = risk <= risk.min(axis=1, keepdims=True) + TIE_TOL
        choice = np.argmax(best, axis=1)
        out = np.zeros_like(risk)
        out[np.arange(len(risk)), choice] = 1.0
        return out

    return AlgorithmKernel("erm", batch, True)


def gibbs_kernel(problem: LearningProblem, beta: float) -> AlgorithmKernel:
    """Gibbs posterior: P(w | S) proportional to exp(-beta * n * R_S(w))."""
    if not beta >= 0:
        raise ValueError(f"inverse temperature must be nonnegative, got {beta}")

    def batch(datasets):
        logits = -beta * problem.n * problem.empirical_risk(_counts(problem, datasets))
        logits -= logits.max(axis=1, keepdims=True)
        w = np.exp(logits)
        return w / w.sum(axis=1, keepdims=True)

    return AlgorithmKernel("gibbs", batch, True, {"beta": float(beta)})


def memorizer_kernel(problem: LearningProblem, targets: Sequence[int] | None = None) -> AlgorithmKernel:
    """For n = 1: echoes the single example, S = (z) -> point mass at ``targets[z]``.

    The default target of instance ``i`` is hypothesis ``i mod |W|``.
    """
    if problem.n != 1:
        raise ValueError("the memorizer is defined for n = 1 only")
    k = problem.n_hypotheses
    t = [i % k for i in range(problem.n_instances)] if targets is None else [int(x) for x in targets]
    if len(t) != problem.n_instances or any(not 0 <= x < k for x in t):
        raise ValueError("memorizer targets must map every instance to a hypothesis index")
    table = np.eye(k)[t]

    def batch(datasets):
        return table[datasets[:, 0]]

    return AlgorithmKernel("memorizer", batch, True, {"targets": t})


def make_kernel(problem: LearningProblem, spec: dict) -> AlgorithmKernel:
    kind = spec.get("type")
    if kind == "constant":
        return constant_kernel(problem, spec.get("probs"))
    if kind == "erm":
        return erm_kernel(problem)
    if kind == "gibbs":
        return gibbs_kernel(problem, float(spec.get("beta", 1.0)))
    if kind == "memorizer":
        return memorizer_kernel(problem, spec.get("targets"))
    raise ParseError(f"unknown kernel type {kind!r}")


def check_permutation_invariance(problem: LearningProblem, kernel: AlgorithmKernel, max_n: int = 4,
                                 tol: float = 1e-12) -> bool:
    """Exhaustively test kernel(sigma(S)) == kernel(S) over all datasets.

    Comparing every dataset with its sorted rearrangement is equivalent to
    comparing it with all of its permutations, since sorting is one of them
    and every permutation has the same sorted form.
    """
    if problem.n > max_n:
        raise ValueError(f"exhaustive check limited to n <= {max_n}")
    tuples = _ordered_tuples(problem.n_instances, problem.n)
    out = kernel.batch(tuples)
    out_sorted = kernel.batch(np.sort(tuples, axis=1))
    return bool(np.max(np.abs(out - out_sorted), initial=0.0) <= tol)


# --- dataset enumeration ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DatasetEnumeration:
    """Datasets as rows of ``tuples`` with probabilities ``weights``.

    With ``multiset=True`` each row is a sorted representative standing for
    all of its rearrangements, and its weight is their total D^n mass.
    """

    tuples: np.ndarray
    weights: np.ndarray
    counts: np.ndarray
    multiset: bool = False

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], float]]:
        for s, w in zip(self.tuples, self.weights):
            yield tuple(int(z) for z in s), float(w)


def _ordered_tuples(m: int, n: int) -> np.ndarray:
    return np.indices((m,) * n).reshape(n, -1).T.astype(np.int64)


def enumerate_datasets(problem: LearningProblem, cap: int = DEFAULT_SETTINGS.enum_cap) -> DatasetEnumeration:
    """All |Z|^n ordered datasets in lexicographic order, weighted by D^n."""
    m, n = problem.n_instances, problem.n
    count = m**n
    if count > cap:
        raise EnumerationCapExceeded(count, cap)
    tuples = _ordered_tuples(m, n)
    weights = np.prod(problem.data_dist.probs[tuples], axis=1)
    return DatasetEnumeration(tuples, weights, _counts(problem, tuples))


def enumerate_multisets(problem: LearningProblem, cap: int = DEFAULT_SETTINGS.enum_cap) -> DatasetEnumeration:
    """Datasets up to reordering, with multinomial weights."""
    m, n = problem.n_instances, problem.n
    count = math.comb(m + n - 1, n)
    if count > cap:
        raise EnumerationCapExceeded(count, cap)
    tuples = np.array(list(itertools.combinations_with_replacement(range(m), n)), dtype=np.int64)
    counts = _counts(problem, tuples)
    log_coef = math.lgamma(n + 1) - np.sum([[math.lgamma(c + 1) for c in row] for row in counts], axis=1)
    d = problem.data_dist.probs
    with np.errstate(divide="ignore"):
        log_mass = np.where(counts > 0, counts * np.log(np.where(d > 0, d, 1.0)), 0.0).sum(axis=1)
    dead = np.any((counts > 0) & (d == 0), axis=1)
    weights = np.where(dead, 0.0, np.exp(log_coef + log_mass))
    return DatasetEnumeration(tuples, weights, counts, multiset=True)


def enumerate_for(problem: LearningProblem, kernel: AlgorithmKernel, cap: int = DEFAULT_SETTINGS.enum_cap,
                  mode: str = "auto") -> DatasetEnumeration:
    """Ordered enumeration when it fits under ``cap``; multisets for invariant kernels otherwise."""
    if mode == "ordered":
        return enumerate_datasets(problem, cap)
    if mode == "multiset":
        if not kernel.permutation_invariant:
            raise ValueError("multiset enumeration needs a permutation-invariant kernel")
        return enumerate_multisets(problem, cap)
    if mode != "auto":
        raise ValueError(f"unknown enumeration mode {mode!r}")
    if problem.n_instances**problem.n <= cap or not kernel.permutation_invariant:
        return enumerate_datasets(problem, cap)
    return enumerate_multisets(problem, cap)


# --- derived distributions ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DerivedDistributions:
    p_w: Distribution
    p_wz: JointDistribution
    p_w_given_z: tuple[Distribution, ...]
    p_sn_w: JointDistribution
    enumeration: DatasetEnumeration
    kernel_outputs: np.ndarray

    @cached_property
    def mi_w_sn(self) -> float:
        return mutual_information(self.p_sn_w)

    @cached_property
    def mi_w_z(self) -> float:
        return mutual_information(self.p_wz)

    @cached_property
    def product_w_z(self) -> np.ndarray:
        """P_W x D as a |W| x |Z| matrix."""
        return np.outer(self.p_w.probs, self.p_wz.probs.sum(axis=0))


def derive_distributions(problem: LearningProblem, kernel: AlgorithmKernel,
                         settings: Settings = DEFAULT_SETTINGS, mode: str = "auto") -> DerivedDistributions:
    enum = enumerate_for(problem, kernel, settings.enum_cap, mode)
    out = np.asarray(kernel.batch(enum.tuples), dtype=float)
    if out.shape != (len(enum), problem.n_hypotheses):
        raise DimensionMismatch(f"kernel returned shape {out.shape}")
    if np.any(out < 0) or np.max(np.abs(out.sum(axis=1) - 1.0), initial=0.0) > 1e-12:
        raise InvalidDistribution(f"kernel {kernel.name!r} produced an invalid distribution")

    joint = enum.weights[:, None] * out
    freq = enum.counts / problem.n
    p_wz_mat = joint.T @ freq
    p_w = Distribution(problem.hypotheses, np.clip(joint.sum(axis=0), 0.0, None))
    p_wz = JointDistribution(problem.hypotheses, problem.instances, p_wz_mat)
    col = p_wz_mat.sum(axis=0)
    given = tuple(
        normalized(problem.hypotheses, p_wz_mat[:, z]) if col[z] > 0 else p_w
        for z in range(problem.n_instances)
    )
    rows = FiniteSet(tuple(tuple(int(z) for z in s) for s in enum.tuples))
    p_sn_w = JointDistribution(rows, problem.hypotheses, joint)
    return DerivedDistributions(p_w, p_wz, given, p_sn_w, enum, out)


def _derived(problem, kernel, derived, settings) -> DerivedDistributions:
    return derived if derived is not None else derive_distributions(problem, kernel, settings)


def expected_generalization_error(problem: LearningProblem, kernel: AlgorithmKernel,
                                  derived: DerivedDistributions | None = None,
                                  settings: Settings = DEFAULT_SETTINGS) -> float:
    """E[R(W) - R_S(W)], signed.

    Computed directly over (S, W) and cross-checked against the per-example
    form E_z[E_{P_W} l(., z) - E_{P_W|z} l(., z)].
    """
    dd = _derived(problem, kernel, derived, settings)
    enum = dd.enumeration
    joint = dd.p_sn_w.probs
    direct = float(np.sum(joint * (problem.population_risk()[None, :] - problem.empirical_risk(enum.counts))))
    per_example = float(np.sum((dd.product_w_z - dd.p_wz.probs) * problem.loss))
    if abs(direct - per_example) > IDENTITY_TOL:
        raise ArithmeticError(
            f"generalization error routes disagree: {direct!r} vs {per_example!r}"
        )
    return direct


def _expected_over_examples(problem, dd: DerivedDistributions, metric: Callable) -> float:
    d = problem.data_dist.probs
    return float(sum(d[z] * metric(dd.p_w, dd.p_w_given_z[z]) for z in range(len(d)) if d[z] > 0))


def algorithmic_transport_cost(problem: LearningProblem, kernel: AlgorithmKernel,
                               derived: DerivedDistributions | None = None,
                               settings: Settings = DEFAULT_SETTINGS) -> float:
    """E_{z~D}[W1(P_W, P_{W|z})]."""
    dd = _derived(problem, kernel, derived, settings)
    space = problem.hypotheses
    return _expected_over_examples(
        problem, dd, lambda p, q: wasserstein1(p, q, space, max_iters=settings.lp_max_iters)[0]
    )


def expected_bl_cost(problem: LearningProblem, kernel: AlgorithmKernel,
                     derived: DerivedDistributions | None = None,
                     settings: Settings = DEFAULT_SETTINGS) -> float:
    """E_{z~D}[BL(P_W, P_{W|z})]."""
    dd = _derived(problem, kernel, derived, settings)
    space = problem.hypotheses
    return _expected_over_examples(
        problem, dd, lambda p, q: bounded_lipschitz(p, q, space, max_iters=settings.lp_max_iters)
    )


def expected_prokhorov_cost(problem: LearningProblem, kernel: AlgorithmKernel,
                            derived: DerivedDistributions | None = None,
                            settings: Settings = DEFAULT_SETTINGS) -> float:
    dd = _derived(problem, kernel, derived, settings)
    space = problem.hypotheses
    return _expected_over_examples(
        problem, dd, lambda p, q: prokhorov(p, q, space, cap=settings.prokhorov_cap)
    )


def expected_tv_cost(problem: LearningProblem, kernel: AlgorithmKernel,
                     derived: DerivedDistributions | None = None,
                     settings: Settings = DEFAULT_SETTINGS) -> float:
    dd = _derived(problem, kernel, derived, settings)
    return _expected_over_examples(problem, dd, total_variation)


@dataclass(frozen=True)
class ProblemConstants:
    K: float
    F: float
    G: float
    diam: float


def problem_constants(problem: LearningProblem, allow_infinite: bool = False) -> ProblemConstants:
    """Smallest Lipschitz constant K, sup-loss F, BL norm G = max(F, K), and diameter.

    Distinct hypotheses at distance 0 with different losses make K infinite:
    this raises :class:`ZeroDistance` unless ``allow_infinite`` is set.
    """
    loss = problem.loss
    d = problem.hypotheses.dist
    gaps = np.abs(loss[:, None, :] - loss[None, :, :]).max(axis=2)
    off = ~np.eye(problem.n_hypotheses, dtype=bool)
    zero = off & (d == 0)
    if np.any(gaps[zero] > 0):
        if not allow_infinite:
            i, j = np.argwhere(zero & (gaps > 0))[0]
            raise ZeroDistance(f"hypotheses {i} and {j} are at distance 0 but their losses differ")
        K = math.inf
    else:
        pos = off & (d > 0)
        K = float(np.max(gaps[pos] / d[pos], initial=0.0))
    F = float(loss.max())
    return ProblemConstants(K, F, max(F, K), problem.hypotheses.diameter)


# --- sampling fallback ------------------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, split off a 64-bit master seed by counter."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(trial),)))


def mc_estimate_transport_cost(problem: LearningProblem, kernel: AlgorithmKernel, seed: int, trials: int,
                               inner: int = 32, settings: Settings = DEFAULT_SETTINGS) -> tuple[float, float]:
    """Monte Carlo estimate of the algorithmic transport cost, with its standard error.

    Each trial draws z ~ D, then estimates P_W from ``inner`` datasets
    S ~ D^n and P_{W|z} from ``inner`` datasets with z planted at a uniformly
    chosen position, and records W1 between the two plug-in estimates.
    """
    if trials < 2:
        raise ValueError("need at least two trials for a standard error")
    d = problem.data_dist.probs
    m, n = problem.n_instances, problem.n
    space = problem.hypotheses
    values = np.empty(trials)
    for t in range(trials):
        rng = trial_rng(seed, t)
        z = rng.choice(m, p=d)
        marg = rng.choice(m, size=(inner, n), p=d)
        cond = rng.choice(m, size=(inner, n), p=d)
        cond[np.arange(inner), rng.integers(n, size=inner)] = z
        p_hat = normalized(space, kernel.batch(marg).mean(axis=0))
        q_hat = normalized(space, kernel.batch(cond).mean(axis=0))
        values[t] = wasserstein1(p_hat, q_hat, space, max_iters=settings.lp_max_iters)[0]
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(trials))


# --- JSON -----------------------------------------------------------------------------


def problem_from_json(obj: Any) -> tuple[LearningProblem, AlgorithmKernel]:
    """Parse the problem/kernel schema.

    ``{"instances": [...], "hypotheses": {"labels": [...], "dist": [[...]]},
    "loss": [[...]] (|W| x |Z|), "data_dist": [...], "n": 2,
    "kernel": {"type": "erm" | "gibbs" | "constant" | "memorizer", "beta": ...}}``
    """
    if not isinstance(obj, dict):
        raise ParseError("problem config must be a JSON object")
    try:
        insts = obj["instances"]
        hyp = space_from_json(obj["hypotheses"])
        inst_space = FiniteSet(tuple(tuple(x) if isinstance(x, list) else x for x in insts))
        data = distribution_from_json({"probs": obj["data_dist"]}, inst_space)
        loss = np.asarray(obj["loss"], dtype=float)
        if loss.ndim != 2 or not np.all(np.isfinite(loss)) or np.any(loss < 0):
            raise ParseError("'loss' must be a finite nonnegative |W| x |Z| matrix")
        n = obj["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ParseError("'n' must be a positive integer")
        problem = LearningProblem(inst_space, hyp, loss, data, n)
        kernel = make_kernel(problem, obj.get("kernel", {"type": "erm"}))
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from exc
    except (DimensionMismatch, InvalidDistribution, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc
    return problem, kernel
