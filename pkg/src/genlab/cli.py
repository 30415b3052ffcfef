"""Command-line front end: ``genlab <subcommand> [flags]``.

Exit codes: 0 success, 1 an inequality violation was found, 2 parse or
usage error, 3 solver failure, 4 an enumeration or subset cap was hit.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Sequence

from . import experiments as ex
from .bounds import evaluate_all
from .config import Settings
from .divergences import chi_squared, hellinger, kl, mutual_information, total_variation
from .errors import (
    EnumerationCapExceeded,
    GenlabError,
    ParseError,
    SolverFailure,
    SpaceTooLarge,
)
from .learner import problem_from_json, trial_rng
from .space import distribution_from_json, joint_from_json, load_json, space_from_json
from .transport import bounded_lipschitz, prokhorov, wasserstein1

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_SOLVER, EXIT_CAP = 0, 1, 2, 3, 4
METRIC_NAMES = ("w1", "tv", "kl", "mi", "hellinger", "chi2", "prokhorov", "bl")
GEN_HEADER = ("bound_name", "value", "true_gen_error", "slack", "assumptions_met", "vacuous")

log = logging.getLogger("genlab")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    log.info("wrote %s", out)


def _settings(args) -> Settings:
    return Settings(lp_max_iters=args.lp_max_iters, enum_cap=args.enum_cap)


def _finish(result: ex.SweepResult, args) -> int:
    _emit(result.csv, args.out)
    if result.violations:
        print(f"{result.violations} violation(s) found", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# --- subcommands -----------------------------------------------------------------------


def cmd_metrics(args) -> int:
    if args.metric == "mi":
        value = mutual_information(joint_from_json(load_json(args.p)))
    else:
        if args.q is None:
            raise ParseError(f"metric {args.metric} needs --q")
        needs_space = args.metric in ("w1", "prokhorov", "bl")
        space = space_from_json(load_json(args.space)) if args.space else None
        if needs_space and space is None:
            raise ParseError(f"metric {args.metric} needs --space")
        p = distribution_from_json(load_json(args.p), space)
        q = distribution_from_json(load_json(args.q), space if space is not None else p.space)
        s = _settings(args)
        value = {
            "w1": lambda: wasserstein1(p, q, space, max_iters=s.lp_max_iters)[0],
            "tv": lambda: total_variation(p, q),
            "kl": lambda: kl(p, q),
            "hellinger": lambda: hellinger(p, q),
            "chi2": lambda: chi_squared(p, q),
            "prokhorov": lambda: prokhorov(p, q, space, cap=s.prokhorov_cap),
            "bl": lambda: bounded_lipschitz(p, q, space, max_iters=s.lp_max_iters),
        }[args.metric]()
    print(ex.fmt(value))
    return EXIT_OK


def cmd_verify_lattice(args) -> int:
    return _finish(ex.sweep("lattice", args.seed, args.trials, args.jobs, _settings(args), args.max_size), args)


def cmd_gen_experiment(args) -> int:
    problem, kernel = problem_from_json(load_json(args.problem))
    reports = evaluate_all(problem, kernel, _settings(args))
    rows = [(r.name, r.value, r.true_gen_error, r.slack, r.applicable, r.vacuous) for r in reports]
    _emit(ex.to_csv(GEN_HEADER, rows), args.out)
    bad = [r.name for r in reports if r.valid is False]
    if bad:
        print("violated: " + ", ".join(bad), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _chain_config(obj, seed: int):
    if not isinstance(obj, dict):
        raise ParseError("chain config must be a JSON object")
    try:
        specs = obj["layers"]
        if not isinstance(specs, list) or not specs:
            raise ParseError("'layers' must be a nonempty list")
        specs = specs * int(obj.get("repeat", 1))
        rng = trial_rng(seed, 0)
        layers = [ex.layer_from_json(s, rng) for s in specs]
        prior_obj = obj.get("prior")
        if prior_obj is None:
            n_in = len(layers[0].in_space)
            prior_obj = {"probs": [1.0 / n_in] * n_in}
        elif isinstance(prior_obj, list):
            prior_obj = {"probs": prior_obj}
        prior = distribution_from_json(prior_obj, layers[0].in_space)
        params = {k: float(obj[k]) for k in ("K", "R") if k in obj}
        if "mi_wsn" in obj:
            params["mi_wsn"] = float(obj["mi_wsn"])
        params["n"] = int(obj.get("n", 1))
        return prior, layers, params
    except ParseError:
        raise
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from exc
    except (GenlabError, TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc


def cmd_chain(args) -> int:
    prior, layers, params = _chain_config(load_json(args.config), args.seed)
    rows = ex.chain_rows(prior, layers, **params)
    _emit(ex.to_csv(ex.CHAIN_HEADER, rows), args.out)
    return EXIT_OK


def cmd_sweep_bounds(args) -> int:
    result = ex.sweep("bounds", args.seed, args.trials, args.jobs, _settings(args))
    if args.identities_out:
        _emit(result.extra_csv, args.identities_out)
    return _finish(result, args)


def cmd_sweep_duality(args) -> int:
    return _finish(ex.sweep("duality", args.seed, args.trials, args.jobs, _settings(args)), args)


def cmd_sweep_sdpi(args) -> int:
    return _finish(ex.sweep("sdpi", args.seed, args.trials, args.jobs, _settings(args)), args)


def cmd_vc(args) -> int:
    return _finish(ex.sweep("vc", args.seed, 0, args.jobs, _settings(args)), args)


# --- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    common.add_argument("--jobs", type=_positive, default=1, help="worker processes")
    common.add_argument("--lp-max-iters", type=_positive, default=10_000)
    common.add_argument("--enum-cap", type=_positive, default=1_000_000)

    def trials(p, default):
        p.add_argument("--trials", type=_positive, default=default)

    parser = argparse.ArgumentParser(prog="genlab", description="Exact probability metrics and generalization bounds on finite spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", parents=[common], help="one metric between two distributions")
    p.add_argument("--metric", required=True, choices=METRIC_NAMES)
    p.add_argument("--p", required=True, help="distribution JSON (a joint for mi)")
    p.add_argument("--q", help="second distribution JSON")
    p.add_argument("--space", help="metric space JSON")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("verify-lattice", parents=[common], help="check every metric relation on random pairs")
    trials(p, 1000)
    p.add_argument("--max-size", type=_positive, default=8)
    p.set_defaults(func=cmd_verify_lattice)

    p = sub.add_parser("gen-experiment", parents=[common], help="all bounds for one problem file")
    p.add_argument("problem")
    p.set_defaults(func=cmd_gen_experiment)

    p = sub.add_parser("chain", parents=[common], help="information decay through stacked channels")
    p.add_argument("config")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("sweep-bounds", parents=[common], help="bound soundness on random problems")
    trials(p, 200)
    p.add_argument("--identities-out", default=None, help="CSV for the per-problem identity checks")
    p.set_defaults(func=cmd_sweep_bounds)

    p = sub.add_parser("sweep-duality", parents=[common], help="primal/dual agreement on random pairs")
    trials(p, 500)
    p.set_defaults(func=cmd_sweep_duality)

    p = sub.add_parser("sweep-sdpi", parents=[common], help="data processing checks on random chains")
    trials(p, 500)
    p.set_defaults(func=cmd_sweep_sdpi)

    p = sub.add_parser("vc", parents=[common], help="VC dimension, growth and ERM checks")
    p.set_defaults(func=cmd_vc)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("GENLAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EnumerationCapExceeded, SpaceTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (GenlabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
