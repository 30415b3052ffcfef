"""Seeded random instances and the sweeps behind the CLI subcommands.

Each sweep is a module-level function of ``(seed, trial)`` returning CSV
rows, so trials can be farmed out to worker processes and merged back in
trial order: the output bytes never depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from . import chain as ch
from .bounds import (
    classification_problem,
    evaluate_all,
    growth_function,
    interval_class,
    sauer_bound,
    thm6_bound,
    threshold_class,
    full_class,
    vc_dimension,
    Analysis,
)
from .config import DEFAULT_SETTINGS, Settings
from .divergences import entropy, total_variation
from .lattice import SLACK_TOL as LATTICE_TOL, verify_all
from .learner import (
    LearningProblem,
    constant_kernel,
    erm_kernel,
    expected_generalization_error,
    expected_tv_cost,
    gibbs_kernel,
    memorizer_kernel,
    trial_rng,
)
from .space import Distribution, FiniteSet, build_space, normalized, plain_set
from .transport import tv_coupling, wasserstein1, wasserstein1_dual

VALIDITY_TOL = 1e-9
IDENTITY_TOL = 1e-10
W1_GAP_TOL = 1e-6
TV_GAP_TOL = 1e-9


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0:
            return "0"
        return f"{x:.12g}"
    return str(x)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def run_trials(fn: Callable[[int, int], list], seed: int, trials: int, jobs: int = 1) -> list:
    """Results of ``fn(seed, t)`` for t = 0..trials-1, in trial order."""
    if jobs <= 1:
        return [fn(seed, t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, [seed] * trials, range(trials), chunksize=max(1, trials // (4 * jobs))))


# --- random instances -----------------------------------------------------------------


def random_metric_space(rng: np.random.Generator, n: int, dim: int = 2):
    """Euclidean distances between uniform points in the unit cube."""
    x = rng.random((n, dim))
    d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2))
    return build_space(range(n), d)


def random_distribution(rng: np.random.Generator, space: FiniteSet, sparsity: float = 0.0) -> Distribution:
    w = rng.dirichlet(np.ones(len(space)))
    if sparsity > 0:
        w[rng.random(len(space)) < sparsity] = 0.0
        if w.sum() == 0:
            w[rng.integers(len(space))] = 1.0
    return normalized(space, w)


def random_problem(rng: np.random.Generator, max_instances: int = 4, max_hypotheses: int = 5,
                   max_n: int = 4, loss_high: float = 5.0) -> LearningProblem:
    m = int(rng.integers(2, max_instances + 1))
    k = int(rng.integers(2, max_hypotheses + 1))
    n = int(rng.integers(1, max_n + 1))
    hyp = random_metric_space(rng, k)
    inst = plain_set(m)
    loss = rng.uniform(0.0, loss_high, size=(k, m))
    return LearningProblem(inst, hyp, loss, random_distribution(rng, inst), n)


def kernel_menu(problem: LearningProblem, rng: np.random.Generator) -> list:
    out = [
        constant_kernel(problem, random_distribution(rng, problem.hypotheses).probs),
        erm_kernel(problem),
        gibbs_kernel(problem, 0.5),
        gibbs_kernel(problem, 2.0),
        gibbs_kernel(problem, 8.0),
    ]
    if problem.n == 1:
        out.append(memorizer_kernel(problem))
    return out


def _kernel_label(kernel) -> str:
    if kernel.name == "gibbs":
        return f"gibbs({kernel.params['beta']:g})"
    return kernel.name


# --- bound soundness sweep (with the per-example identities) -------------------------

BOUND_HEADER = ("trial", "kernel", "bound_name", "value", "true_gen_error", "slack",
                "assumptions_met", "vacuous", "valid")
IDENTITY_HEADER = ("trial", "kernel", "n", "mean_tv_conditional", "tv_joint_product", "tv_gap",
                   "n_mi_w_z", "mi_w_sn", "chain_rule_slack")


def bounds_trial(seed: int, t: int, settings: Settings = DEFAULT_SETTINGS) -> tuple[list, list]:
    rng = trial_rng(seed, t)
    problem = random_problem(rng)
    bound_rows, identity_rows = [], []
    for kernel in kernel_menu(problem, rng):
        label = _kernel_label(kernel)
        a = Analysis(problem, kernel, settings)
        for r in evaluate_all(problem, kernel, settings):
            bound_rows.append((t, label, r.name, r.value, r.true_gen_error, r.slack, r.applicable,
                               r.vacuous, "skipped" if r.valid is None else r.valid))
        dd = a.derived
        mean_tv = expected_tv_cost(problem, kernel, dd, settings)
        tv_joint = total_variation(dd.product_w_z, dd.p_wz.probs)
        n_mi = problem.n * dd.mi_w_z
        identity_rows.append((t, label, problem.n, mean_tv, tv_joint, abs(mean_tv - tv_joint),
                              n_mi, dd.mi_w_sn, dd.mi_w_sn - n_mi))
    return bound_rows, identity_rows


# --- duality ------------------------------------------------------------------------------

DUALITY_HEADER = ("trial", "size", "w1_primal", "w1_dual", "w1_gap", "tv", "tv_coupling", "tv_gap")


def random_pair(rng: np.random.Generator, min_size: int = 2, max_size: int = 8):
    n = int(rng.integers(min_size, max_size + 1))
    space = random_metric_space(rng, n)
    sparsity = 0.25 if rng.random() < 0.5 else 0.0
    return space, random_distribution(rng, space, sparsity), random_distribution(rng, space, sparsity)


def duality_trial(seed: int, t: int, settings: Settings = DEFAULT_SETTINGS) -> list:
    rng = trial_rng(seed, t)
    space, p, q = random_pair(rng)
    w, _ = wasserstein1(p, q, space, max_iters=settings.lp_max_iters)
    wd, _ = wasserstein1_dual(p, q, space, max_iters=settings.lp_max_iters)
    tv = total_variation(p, q)
    tvc, _ = tv_coupling(p, q)
    return [(t, len(space), w, wd, abs(w - wd), tv, tvc, abs(tv - tvc))]


# --- lattice ------------------------------------------------------------------------------

LATTICE_HEADER = ("trial_id", "edge", "lhs", "rhs", "slack")


def lattice_trial(seed: int, t: int, max_size: int = 8, settings: Settings = DEFAULT_SETTINGS) -> list:
    rng = trial_rng(seed, t)
    space, p, q = random_pair(rng, 2, max_size)
    reports = verify_all(p, q, space, max_iters=settings.lp_max_iters, prokhorov_cap=settings.prokhorov_cap)
    return [(t, r.edge.name, r.lhs, r.rhs, r.slack) for r in reports]


# --- SDPI ---------------------------------------------------------------------------------

SDPI_HEADER = ("trial", "nx", "ny", "nz", "i_xy", "i_xz", "eta_k2", "dpi_slack", "sdpi_slack",
               "eta_k1", "eta_composed", "submult_slack")


def sdpi_trial(seed: int, t: int) -> list:
    rng = trial_rng(seed, t)
    nx, ny, nz = (int(v) for v in rng.integers(2, 6, size=3))
    prior = normalized(plain_set(nx), rng.uniform(0.05, 1.0, size=nx))
    k1 = ch.random_channel(rng, nx, ny)
    k2 = ch.random_channel(rng, ny, nz)
    res = ch.sdpi_check(prior, k1, k2)
    e1 = ch.dobrushin(k1)
    ec = ch.dobrushin(ch.compose(k1, k2))
    return [(t, nx, ny, nz, res.i_xy, res.i_xz, res.eta_tv, res.i_xy - res.i_xz,
             res.eta_tv * res.i_xy - res.i_xz, e1, ec, e1 * res.eta_tv - ec)]


# --- depth decay --------------------------------------------------------------------------

CHAIN_HEADER = ("depth", "mi", "eta_product_bound", "thm7_bound")


def chain_rows(prior: Distribution, layers: Sequence, K: float = 1.0, R: float = 1.0,
               mi_wsn: float | None = None, n: int = 1) -> list:
    """Depth-indexed decay table: I(X;Y_k), its eta-product bound, and the depth-k bound."""
    mi_seq, report = ch.depth_decay(prior, layers)
    eta_bounds = ch.eta_product_bounds(mi_seq, report.per_layer)
    info = entropy(prior) if mi_wsn is None else mi_wsn
    rows = []
    for k in range(1, len(layers) + 1):
        eta = ch._geo_mean(report.per_layer[:k])
        rows.append((k, mi_seq[k - 1], eta_bounds[k - 1], ch.thm7_bound(K, R, k, eta, info, n)))
    return rows


def layer_from_json(spec: dict, rng: np.random.Generator | None = None):
    kind = spec.get("type")
    if kind == "bsc":
        return ch.bsc(float(spec["p"]))
    if kind == "erasure":
        return ch.binary_erasure(float(spec["e"]))
    if kind == "identity":
        return ch.identity_channel(int(spec["n"]))
    if kind == "constant":
        probs = spec["probs"]
        return ch.constant_channel(int(spec.get("n_in", len(probs))), probs)
    if kind == "matrix":
        return ch.channel(spec["rows"])
    if kind == "random":
        if rng is None:
            raise ValueError("random layers need a seed")
        return ch.random_channel(rng, int(spec["n_in"]), int(spec["n_out"]))
    raise ValueError(f"unknown layer type {kind!r}")


# --- VC suite -------------------------------------------------------------------------------

VC_HEADER = ("record", "class", "n", "value", "bound", "holds")
VC_CLASSES = {
    "threshold10": lambda: threshold_class(10),
    "interval10": lambda: interval_class(10),
    "full4": lambda: full_class(4),
}
VC_EXPECTED_DIM = {"threshold10": 1, "interval10": 2, "full4": 4}
VC_ERM_CASES = (("threshold5", 2), ("threshold5", 4), ("threshold5", 8),
                ("interval3", 2), ("interval3", 4), ("interval3", 8))
VC_TASKS = tuple(("class", name) for name in VC_CLASSES) + tuple(("erm", c) for c in VC_ERM_CASES)


def vc_task(seed: int, t: int) -> list:
    """One unit of the VC suite; ``seed`` is unused (the suite is deterministic)."""
    kind, arg = VC_TASKS[t]
    if kind == "class":
        hc = VC_CLASSES[arg]()
        d = vc_dimension(hc)
        rows = [("vc_dimension", arg, "", d, VC_EXPECTED_DIM[arg], d == VC_EXPECTED_DIM[arg])]
        for n in range(1, 9):
            g = growth_function(hc, n)
            s = sauer_bound(d, n)
            rows.append(("growth_vs_sauer", arg, n, g, s, g <= s))
        return rows
    name, n = arg
    hc = threshold_class(5) if name == "threshold5" else interval_class(3)
    problem = classification_problem(hc, n)
    gen = expected_generalization_error(problem, erm_kernel(problem))
    bound = thm6_bound(vc_dimension(hc), n)
    return [("erm_gen_vs_thm6", name, n, gen, bound, gen <= bound + 1e-9)]


def gather(results: list) -> list:
    return [row for rows in results for row in rows]


@dataclass(frozen=True)
class SweepResult:
    csv: str
    violations: int
    extra_csv: str | None = None


def _bound_violations(rows) -> int:
    return sum(1 for r in rows if r[8] is False)


def _identity_violations(rows) -> int:
    return sum(1 for r in rows if not (r[5] <= IDENTITY_TOL and r[8] >= -VALIDITY_TOL))


def _duality_violations(rows) -> int:
    return sum(1 for r in rows if not (r[4] <= W1_GAP_TOL and r[7] <= TV_GAP_TOL))


def _sdpi_violations(rows) -> int:
    return sum(1 for r in rows if min(r[7], r[8], r[11]) < -VALIDITY_TOL)


def sweep(kind: str, seed: int, trials: int, jobs: int = 1, settings: Settings = DEFAULT_SETTINGS,
          max_size: int = 8) -> SweepResult:
    """Run a named sweep; the CSV text is independent of ``jobs``."""
    if kind == "bounds":
        res = run_trials(partial(bounds_trial, settings=settings), seed, trials, jobs)
        brows, irows = gather([r[0] for r in res]), gather([r[1] for r in res])
        return SweepResult(to_csv(BOUND_HEADER, brows),
                           _bound_violations(brows) + _identity_violations(irows),
                           to_csv(IDENTITY_HEADER, irows))
    if kind == "duality":
        rows = gather(run_trials(partial(duality_trial, settings=settings), seed, trials, jobs))
        return SweepResult(to_csv(DUALITY_HEADER, rows), _duality_violations(rows))
    if kind == "lattice":
        fn = partial(lattice_trial, max_size=max_size, settings=settings)
        rows = gather(run_trials(fn, seed, trials, jobs))
        return SweepResult(to_csv(LATTICE_HEADER, rows), sum(1 for r in rows if r[4] < -LATTICE_TOL))
    if kind == "sdpi":
        rows = gather(run_trials(sdpi_trial, seed, trials, jobs))
        return SweepResult(to_csv(SDPI_HEADER, rows), _sdpi_violations(rows))
    if kind == "vc":
        rows = gather(run_trials(vc_task, seed, len(VC_TASKS), jobs))
        return SweepResult(to_csv(VC_HEADER, rows), sum(1 for r in rows if not r[5]))
    raise ValueError(f"unknown sweep {kind!r}")
