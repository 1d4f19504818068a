"""Command-line entry point.

Reports go to stdout as JSON, logs to stderr. Exit codes: 0 pass, 1 usage or
library error, 2 band or invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import structlog

from entropylab.app.config import get_settings
from entropylab.app.core.exceptions import EntropyLabException, ValidationException
from entropylab.app.core.logging import setup_logging
from entropylab.app.schemas.experiments import (
    CjBandConfig,
    EntropyOracleConfig,
    EnvelopeParamsSpec,
    ExperimentConfig,
    HSetProfileSpec,
    TreeGenConfig,
    WeightProfileSpec,
    parse_experiment,
)
from entropylab.app.services.asymptotics import envelope
from entropylab.app.services.summation import (
    NormMethod,
    SummationOperator,
    norm_estimate,
    operator_norm,
)
from entropylab.app.services.trees import (
    VertexWeighting,
    dump_partition,
    dyadic_chain,
    load_operator,
    load_tree,
    partition_balanced,
    verify_dyadic_chain,
    verify_hset_condition,
    verify_partition_lemma,
)
from entropylab.app.tasks.acceptance import CRITERIA, acceptance
from entropylab.app.tasks.experiments import build_envelope_params, build_hset_profile, run_experiment

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2


def _emit(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, default=str))


def _verdict(passed: bool) -> int:
    return EXIT_OK if passed else EXIT_FAILED


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ValidationException(f"Cannot read {path}: {e.strerror}", field="path") from e


def _json_arg(text: str, field: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationException(f"Invalid JSON for --{field}: {e.msg}", field=field) from e


def _experiment(config: ExperimentConfig, args: argparse.Namespace) -> int:
    updates: dict[str, Any] = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["output"] = args.out
    if updates:
        config = config.model_copy(update=updates)
    out_dir = Path(config.output) if config.output else None
    result = run_experiment(config, out_dir=out_dir, jobs=args.jobs)
    _emit(
        {
            "kind": result.kind,
            "passed": result.passed,
            "duration_s": round(result.duration_s, 3),
            "files": [str(f) for f in result.files],
            **result.report,
        }
    )
    return _verdict(result.passed)


# =============================================================================
# Subcommands
# =============================================================================


def cmd_run(args: argparse.Namespace) -> int:
    config = parse_experiment(_read_text(args.config))
    return _experiment(config, args)


def cmd_acceptance(args: argparse.Namespace) -> int:
    report = acceptance(
        suite=args.suite or None,
        band=args.band,
        seed=args.seed or 0,
        jobs=args.jobs,
    )
    payload = report.to_dict()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "acceptance.json").write_text(json.dumps(payload, indent=2, default=str))
    _emit(payload)
    return _verdict(report.passed)


def cmd_tree_gen(args: argparse.Namespace) -> int:
    config = TreeGenConfig(
        profile=HSetProfileSpec(preset=args.preset),
        depth=args.depth,
        sample=args.sample,
    )
    return _experiment(config, args)


def cmd_tree_verify(args: argparse.Namespace) -> int:
    tree = load_tree(_read_text(args.tree))
    profile = build_hset_profile(HSetProfileSpec(preset=args.preset))
    report = verify_hset_condition(
        tree, profile, sample=args.sample, c_star=args.c_star, seed=args.seed or 0
    )
    _emit({"vertices": tree.size, "depth": tree.depth, **report.to_dict()})
    return _verdict(report.passed)


def cmd_tree_partition(args: argparse.Namespace) -> int:
    tree = load_tree(_read_text(args.tree), max_branching=args.k)
    weighting = VertexWeighting.uniform(tree.size)
    if args.chain is not None:
        reports = dyadic_chain(tree, weighting, args.chain)
        verdict = verify_dyadic_chain(reports, tree, weighting)
        finest = reports[-1]
    else:
        finest = partition_balanced(tree, weighting, args.n)
        reports = [finest]
        verdict = verify_partition_lemma(finest, tree, weighting)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "partition.txt").write_text(dump_partition(finest.parts))
    _emit(
        {
            "passed": verdict.passed,
            "violations": verdict.violations,
            "max_condition_ratio": verdict.max_condition_ratio,
            "max_intersections": verdict.max_intersections,
            "levels": [r.to_dict() for r in reports],
        }
    )
    return _verdict(verdict.passed)


def cmd_sumop_norm(args: argparse.Namespace) -> int:
    tree, u_levels, w_levels = load_operator(_read_text(args.operator))
    S = SummationOperator.from_levels(tree, u_levels, w_levels, args.p, args.q)
    result = operator_norm(S)
    payload: dict[str, Any] = {"vertices": tree.size, "p": str(S.p), "q": str(S.q), **result.to_dict()}
    passed = True
    if result.method is not NormMethod.ASCENT:
        estimate = norm_estimate(S)
        gap = abs(estimate.lower_bound - result.value) / max(result.value, np.finfo(float).tiny)
        payload["estimate"] = estimate.lower_bound
        payload["relative_gap"] = gap
        passed = gap <= args.rtol
    payload["passed"] = passed
    _emit(payload)
    return _verdict(passed)


def cmd_sumop_band(args: argparse.Namespace) -> int:
    weights = _json_arg(args.weights, "weights") if args.weights else {}
    config = CjBandConfig(
        weights=WeightProfileSpec(**weights),
        profile=HSetProfileSpec(preset=args.preset),
        p=args.p,
        q=args.q,
        j_min=args.j_min,
        j_max=args.j_max,
        band=args.band,
    )
    return _experiment(config, args)


def cmd_envelope_eval(args: argparse.Namespace) -> int:
    spec = EnvelopeParamsSpec(**_json_arg(args.params, "params"))
    params = build_envelope_params(spec)
    values = [envelope(params, n).to_dict() | {"n": n} for n in args.n]
    _emit({"side": spec.side, "values": values})
    return EXIT_OK


def cmd_entropy_oracle(args: argparse.Namespace) -> int:
    config = EntropyOracleConfig(
        matrix=_json_arg(args.matrix, "matrix"),
        p=args.p,
        q=args.q,
        ks=args.k,
        mesh=args.mesh,
    )
    return _experiment(config, args)


# =============================================================================
# Parser
# =============================================================================


def _exponent(text: str) -> float | str:
    return "inf" if text.lower() in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="Worker processes")
    common.add_argument("--seed", type=int, default=None, help="Overrides the config seed")
    common.add_argument("--out", default=None, help="Output directory")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog="entropylab",
        description="Entropy numbers of embeddings and summation operators on trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="Run an experiment config")
    p.add_argument("config", help="Experiment JSON file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("acceptance", parents=[common], help="Run acceptance criteria")
    p.add_argument("suite", nargs="*", help=f"Criteria (default all): {', '.join(CRITERIA)}")
    p.add_argument("--band", type=float, default=None, help="Override the Schutt band")
    p.set_defaults(func=cmd_acceptance)

    tree = sub.add_parser("tree", help="h-set trees and balanced partitions")
    tree_sub = tree.add_subparsers(dest="tree_command", required=True)

    p = tree_sub.add_parser("gen", parents=[common], help="Generate and verify an h-set tree")
    p.add_argument("--preset", default="binary")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--sample", type=int, default=None)
    p.set_defaults(func=cmd_tree_gen)

    p = tree_sub.add_parser("verify", parents=[common], help="Check a tree against a profile")
    p.add_argument("tree", help="Tree file (id parent level per line)")
    p.add_argument("--preset", default="binary")
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--c-star", type=float, default=None)
    p.set_defaults(func=cmd_tree_verify)

    p = tree_sub.add_parser("partition", parents=[common], help="Balanced partition of a tree")
    p.add_argument("tree", help="Tree file (id parent level per line)")
    p.add_argument("--k", type=int, default=None, help="Branching bound")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--n", type=int, default=1)
    group.add_argument("--chain", type=int, default=None, help="Dyadic chain depth")
    p.set_defaults(func=cmd_tree_partition)

    sumop = sub.add_parser("sumop", help="Summation operators on trees")
    sumop_sub = sumop.add_subparsers(dest="sumop_command", required=True)

    p = sumop_sub.add_parser("norm", parents=[common], help="Norm of an operator file")
    p.add_argument("operator", help="Operator file (tree lines, blank line, j u w lines)")
    p.add_argument("--p", type=_exponent, default=2.0)
    p.add_argument("--q", type=_exponent, default=2.0)
    p.add_argument("--rtol", type=float, default=1e-6)
    p.set_defaults(func=cmd_sumop_norm)

    p = sumop_sub.add_parser("band", parents=[common], help="Subtree norms against C(j)")
    p.add_argument("--weights", default=None, help="Weight profile JSON")
    p.add_argument("--preset", default="binary")
    p.add_argument("--p", type=_exponent, default=1.0)
    p.add_argument("--q", type=_exponent, default=1.0)
    p.add_argument("--j-min", type=int, default=2)
    p.add_argument("--j-max", type=int, default=8)
    p.add_argument("--band", type=float, default=None)
    p.set_defaults(func=cmd_sumop_band)

    envelope_parser = sub.add_parser("envelope", help="Asymptotic envelopes")
    envelope_sub = envelope_parser.add_subparsers(dest="envelope_command", required=True)
    p = envelope_sub.add_parser("eval", parents=[common], help="Evaluate an envelope")
    p.add_argument("--params", required=True, help="Envelope parameters JSON")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_envelope_eval)

    entropy = sub.add_parser("entropy", help="Entropy numbers of small matrices")
    entropy_sub = entropy.add_subparsers(dest="entropy_command", required=True)
    p = entropy_sub.add_parser("oracle", parents=[common], help="Oracle brackets of e_k(T)")
    p.add_argument("--matrix", required=True, help="Matrix as JSON rows")
    p.add_argument("--p", type=_exponent, default="inf")
    p.add_argument("--q", type=_exponent, default="inf")
    p.add_argument("--k", type=int, nargs="+", default=list(range(1, 7)))
    p.add_argument("--mesh", type=float, default=0.005)
    p.set_defaults(func=cmd_entropy_oracle)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    setup_logging("DEBUG" if args.verbose else get_settings().log_level)
    try:
        return args.func(args)
    except EntropyLabException as e:
        logger.error("Command failed", command=args.command, **e.to_dict())
        print(f"error [{e.error_code}]: {e.message}", file=sys.stderr)
        if e.suggestion:
            print(f"suggestion: {e.suggestion}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        # pydantic config errors raised while assembling subcommand configs
        print(f"error [VALIDATION_ERROR]: {e}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
