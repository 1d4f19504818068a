"""Experiment runners: one per config kind, plus result and metadata emission."""

from __future__ import annotations

import dataclasses
import json
import math
import platform
import time
import uuid
from collections.abc import Callable
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import scipy
import structlog

from entropylab.app import __version__
from entropylab.app.config import Settings, get_settings
from entropylab.app.core.logging import ExperimentLogger
from entropylab.app.schemas.experiments import (
    CjBandConfig,
    EntropyOracleConfig,
    EnvelopeConfig,
    EnvelopeParamsSpec,
    ExperimentConfig,
    HSetProfileSpec,
    KuhnConfig,
    PartitionFuzzConfig,
    SchuttBandConfig,
    SequenceSpec,
    SlopeConfig,
    SumopNormConfig,
    TreeGenConfig,
)
from entropylab.app.services.asymptotics import (
    EnvelopeParams,
    RateSeries,
    envelope,
    slope_fit,
)
from entropylab.app.services.entropy import (
    FiniteSequence,
    GeometricSequence,
    OperatorMatrix,
    PowerLawSequence,
    SequenceProfile,
    check_doubling,
    entropy_oracle_coarsened,
    entropy_profile,
    kuhn_exponent,
    kuhn_omega,
    norm_upper_bound,
    schutt_envelope,
)
from entropylab.app.services.spaces import Exponent
from entropylab.app.services.summation import (
    SummationOperator,
    WeightProfile,
    cj_band_experiment,
    norm_estimate,
    norm_exact,
    to_matrix,
)
from entropylab.app.services.trees import (
    HSetProfile,
    VertexWeighting,
    dump_tree,
    dyadic_chain,
    generate_hset_tree,
    partition_balanced,
    profile_preset,
    random_tree,
    random_weights,
    verify_dyadic_chain,
    verify_hset_condition,
    verify_partition_lemma,
)
from entropylab.app.tasks.pool import map_cells

logger = structlog.get_logger(__name__)

FLOAT_FORMAT = "%.17g"


@dataclass
class ExperimentResult:
    """Outcome of one experiment run."""

    kind: str
    passed: bool
    table: pd.DataFrame | None = None
    report: dict[str, Any] = field(default_factory=dict)
    duration_s: float = 0.0
    files: list[Path] = field(default_factory=list)
    extras: dict[str, str] = field(default_factory=dict)  # file name -> text

    def csv_body(self) -> str:
        if self.table is None:
            return ""
        return self.table.to_csv(index=False, float_format=FLOAT_FORMAT)


def cell_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for cell ``index`` of a run seeded with ``seed``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


# =============================================================================
# Builders from config blocks
# =============================================================================


def build_hset_profile(spec: HSetProfileSpec) -> HSetProfile:
    overrides = spec.overrides()
    if spec.preset is None:
        return HSetProfile(**overrides)
    return dataclasses.replace(profile_preset(spec.preset), **overrides)


def build_sequence(spec: SequenceSpec) -> SequenceProfile:
    if spec.type == "geometric":
        return GeometricSequence(scale=spec.scale, ratio=spec.ratio)
    if spec.type == "power":
        return PowerLawSequence(scale=spec.scale, exponent=spec.exponent)
    return FiniteSequence(values=tuple(spec.values))


def build_envelope_params(spec: EnvelopeParamsSpec) -> EnvelopeParams:
    return EnvelopeParams(**spec.model_dump())


# =============================================================================
# Entropy numbers
# =============================================================================


def run_entropy_oracle(config: EntropyOracleConfig, jobs: int, settings: Settings) -> ExperimentResult:
    T = OperatorMatrix(np.asarray(config.matrix, dtype=float), config.p, config.q)
    intervals = entropy_profile(T, sorted(set(config.ks)), config.mesh, settings)
    table = pd.DataFrame(
        {
            "k": [i.k for i in intervals],
            "lower": [i.lower for i in intervals],
            "upper": [i.upper for i in intervals],
            "width": [i.width for i in intervals],
            "method": [i.method.value for i in intervals],
        }
    )
    return ExperimentResult(
        kind=config.kind,
        passed=True,
        table=table,
        report={"operator": T.to_dict(), "max_width": float(table["width"].max())},
    )


def _schutt_cell(cell: tuple[float | str, float | str, int, int, float, Settings]) -> dict[str, Any]:
    p, q, dim, k, mesh, settings = cell
    interval = entropy_oracle_coarsened(OperatorMatrix.identity(dim, p, q), k, mesh, settings)
    envelope_value = schutt_envelope(p, q, dim, k)
    return {
        "p": str(Exponent.of(p)),
        "q": str(Exponent.of(q)),
        "dim": dim,
        "k": k,
        "lower": interval.lower,
        "upper": interval.upper,
        "mesh": interval.net_mesh,
        "envelope": envelope_value,
        "ratio": envelope_value / interval.midpoint,
    }


def run_schutt_band(config: SchuttBandConfig, jobs: int, settings: Settings) -> ExperimentResult:
    band = config.band if config.band is not None else settings.schutt_band
    cells = [
        (p, q, dim, k, config.mesh, settings)
        for p in config.exponents
        for q in config.exponents
        for dim in config.dims
        for k in config.ks
        if k <= settings.oracle_max_k and dim <= settings.oracle_max_dim
    ]
    table = pd.DataFrame(map_cells(_schutt_cell, cells, jobs))
    verdicts = {}
    for (p, q), group in table.groupby(["p", "q"], sort=False):
        low, high = float(group["ratio"].min()), float(group["ratio"].max())
        verdicts[f"{p},{q}"] = {
            "min_ratio": low,
            "max_ratio": high,
            "passed": 1.0 / band <= low and high <= band,
        }
    passed = all(v["passed"] for v in verdicts.values())
    return ExperimentResult(
        kind=config.kind, passed=passed, table=table, report={"band": band, "pairs": verdicts}
    )


def run_kuhn(config: KuhnConfig, jobs: int, settings: Settings) -> ExperimentResult:
    sigma = build_sequence(config.sequence)
    ns = sorted(set(config.ns))
    omegas = [kuhn_omega(sigma, config.p, config.q, n) for n in ns]
    table = pd.DataFrame({"n": ns, "omega": omegas})
    report: dict[str, Any] = {
        "s": kuhn_exponent(config.p, config.q),
        "doubling_constant": check_doubling(sigma, config.p, config.q, config.doubling_n),
    }
    passed = True
    if isinstance(sigma, GeometricSequence) and sigma.scale > 0 and sigma.ratio > 0:
        s = report["s"]
        closed = [
            sigma.scale * sigma.ratio**n * (1.0 - sigma.ratio**s) ** (-1.0 / s) for n in ns
        ]
        errors = [abs(a - b) / b for a, b in zip(omegas, closed, strict=True)]
        table["closed_form"] = closed
        report["max_relative_error"] = max(errors)
        report["expected_doubling"] = sigma.ratio ** (-config.doubling_n)
        passed = max(errors) <= 1e-12
    return ExperimentResult(kind=config.kind, passed=passed, table=table, report=report)


# =============================================================================
# Trees
# =============================================================================


def run_tree_gen(config: TreeGenConfig, jobs: int, settings: Settings) -> ExperimentResult:
    profile = build_hset_profile(config.profile)
    generated = generate_hset_tree(profile, config.depth, settings)
    check = verify_hset_condition(
        generated.tree, profile, sample=config.sample, seed=config.seed, settings=settings
    )
    counts = generated.tree.level_counts()
    table = pd.DataFrame(
        {
            "level": np.arange(counts.size),
            "vertices": counts,
            "target": generated.targets[: counts.size],
        }
    )
    report = {
        "profile": dataclasses.asdict(profile),
        "vertices": generated.tree.size,
        "depth": generated.tree.depth,
        "deficient_vertices": generated.deficient_vertices,
        "check": check.to_dict(),
    }
    return ExperimentResult(
        kind=config.kind,
        passed=check.passed,
        table=table,
        report=report,
        extras={"tree.txt": dump_tree(generated.tree)},
    )


def _partition_cell(cell: tuple[int, int, int, int, int]) -> dict[str, Any]:
    seed, index, max_vertices, k, chain_depth = cell
    local = cell_seed(seed, index)
    rng = np.random.default_rng(local)
    size = int(rng.integers(1, max_vertices + 1))
    tree = random_tree(local, size, k)
    weighting = VertexWeighting(random_weights(local + 1, size))

    violations: list[str] = []
    worst_ratio = 0.0
    worst_count_ratio = 0.0
    ns = [2**i for i in range(int(math.log2(size)) + 1)]
    for n in ns:
        report = partition_balanced(tree, weighting, n)
        verdict = verify_partition_lemma(report, tree, weighting)
        worst_ratio = max(worst_ratio, verdict.max_condition_ratio)
        worst_count_ratio = max(worst_count_ratio, report.parts_count / n)
        violations += [f"n={n}: {v}" for v in verdict.violations]
    depth = min(chain_depth, int(math.log2(size)))
    chain = verify_dyadic_chain(dyadic_chain(tree, weighting, depth), tree, weighting)
    violations += [f"chain: {v}" for v in chain.violations]
    return {
        "tree": index,
        "vertices": size,
        "k": k,
        "ns_checked": len(ns),
        "max_condition_ratio": worst_ratio,
        "max_parts_per_n": worst_count_ratio,
        "max_intersections": chain.max_intersections,
        "violations": len(violations),
        "first_violation": violations[0] if violations else "",
    }


def run_partition_fuzz(config: PartitionFuzzConfig, jobs: int, settings: Settings) -> ExperimentResult:
    trees = config.trees or settings.acceptance_fuzz_trees
    max_vertices = config.max_vertices or settings.acceptance_fuzz_max_vertices
    cells = [
        (config.seed, i, max_vertices, config.branchings[i % len(config.branchings)], config.chain_depth)
        for i in range(trees)
    ]
    table = pd.DataFrame(map_cells(_partition_cell, cells, jobs))
    failures = int((table["violations"] > 0).sum())
    report = {
        "trees": trees,
        "failures": failures,
        "max_condition_ratio": float(table["max_condition_ratio"].max()),
        "max_parts_per_n": float(table["max_parts_per_n"].max()),
    }
    return ExperimentResult(kind=config.kind, passed=failures == 0, table=table, report=report)


# =============================================================================
# Summation operators
# =============================================================================


def random_operator(seed: int, max_vertices: int, p: float | str, q: float | str) -> SummationOperator:
    """Seeded tree with positive weights in [0.1, 1]."""
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, max_vertices + 1))
    k = int(rng.integers(2, 5))
    tree = random_tree(seed, size, k)
    u = random_weights(seed + 1, size, 0.1, 1.0)
    w = random_weights(seed + 2, size, 0.1, 1.0)
    return SummationOperator(tree, u, w, p, q)


def _sumop_cell(
    cell: tuple[int, int, int, list[tuple[Any, Any]], float, Settings],
) -> list[dict[str, Any]]:
    seed, index, max_vertices, regimes, rtol, settings = cell
    local = cell_seed(seed, index)
    rows = []
    for p, q in regimes:
        S = random_operator(local, max_vertices, p, q)
        exact = norm_exact(S, settings)
        estimate = norm_estimate(S, settings=settings)
        upper = norm_upper_bound(to_matrix(S, settings), settings)
        error = abs(estimate.lower_bound - exact.value) / exact.value
        rows.append(
            {
                "tree": index,
                "vertices": S.size,
                "p": str(S.p),
                "q": str(S.q),
                "exact": exact.value,
                "estimate": estimate.lower_bound,
                "upper_bound": upper,
                "relative_error": error,
                "passed": error <= rtol and estimate.lower_bound <= upper * (1 + 1e-12),
            }
        )
    return rows


def run_sumop_norm(config: SumopNormConfig, jobs: int, settings: Settings) -> ExperimentResult:
    trees = config.trees or settings.acceptance_sumop_trees
    max_vertices = config.max_vertices or settings.acceptance_sumop_max_vertices
    regimes = [tuple(r) for r in config.regimes]
    cells = [(config.seed, i, max_vertices, regimes, config.rtol, settings) for i in range(trees)]
    rows = [row for group in map_cells(_sumop_cell, cells, jobs) for row in group]
    table = pd.DataFrame(rows)
    report = {
        "trees": trees,
        "max_relative_error": float(table["relative_error"].max()),
        "failures": int((~table["passed"]).sum()),
    }
    return ExperimentResult(
        kind=config.kind, passed=bool(table["passed"].all()), table=table, report=report
    )


def run_cj_band(config: CjBandConfig, jobs: int, settings: Settings) -> ExperimentResult:
    weights = WeightProfile(**config.weights.model_dump())
    hprofile = build_hset_profile(config.profile)
    result = cj_band_experiment(
        weights,
        hprofile,
        config.p,
        config.q,
        range(config.j_min, config.j_max + 1),
        extra_depth=config.extra_depth,
        band=config.band,
        settings=settings,
    )
    table = pd.DataFrame(
        {"j": result.js, "norm": result.norms, "envelope": result.envelopes, "ratio": result.ratios}
    )
    return ExperimentResult(
        kind=config.kind, passed=result.passed, table=table, report=result.to_dict()
    )


# =============================================================================
# Asymptotics
# =============================================================================


def _envelope_series(config: EnvelopeConfig, settings: Settings) -> tuple[RateSeries, list]:
    params = build_envelope_params(config.params)
    values = [envelope(params, 2.0**e, settings) for e in range(config.start, config.stop + 1)]
    series = RateSeries([2.0**e for e in range(config.start, config.stop + 1)], [v.value for v in values])
    return series, values


def run_envelope(config: EnvelopeConfig, jobs: int, settings: Settings) -> ExperimentResult:
    series, values = _envelope_series(config, settings)
    report = {
        "theorem": values[0].theorem,
        "case_id": values[0].case_id,
        "power": values[0].power,
        "log_power": values[0].log_power,
    }
    return ExperimentResult(kind=config.kind, passed=True, table=series.to_frame(), report=report)


def run_slope(config: SlopeConfig, jobs: int, settings: Settings) -> ExperimentResult:
    series, values = _envelope_series(config, settings)
    fit = slope_fit(series)
    coded = values[0]
    power_error = abs(fit.power - coded.power)
    log_error = abs(fit.log_power - coded.log_power)
    report = {
        "theorem": coded.theorem,
        "case_id": coded.case_id,
        "coded_power": coded.power,
        "coded_log_power": coded.log_power,
        "fit": fit.to_dict(),
        "power_error": power_error,
        "log_power_error": log_error,
    }
    passed = power_error <= config.power_tol and log_error <= config.log_power_tol
    return ExperimentResult(kind=config.kind, passed=passed, table=series.to_frame(), report=report)


RUNNERS: dict[str, Callable[[Any, int, Settings], ExperimentResult]] = {
    "entropy-oracle": run_entropy_oracle,
    "schutt-band": run_schutt_band,
    "kuhn": run_kuhn,
    "tree-gen": run_tree_gen,
    "partition-fuzz": run_partition_fuzz,
    "sumop-norm": run_sumop_norm,
    "cj-band": run_cj_band,
    "envelope": run_envelope,
    "slope": run_slope,
}


# =============================================================================
# Entry point
# =============================================================================


def _versions() -> dict[str, str]:
    return {
        "entropylab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def write_outputs(result: ExperimentResult, config: ExperimentConfig, out_dir: Path) -> list[Path]:
    """Write results.csv (if tabular), extra files, report.json and meta.json into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    if result.table is not None:
        path = out_dir / "results.csv"
        path.write_text(result.csv_body())
        files.append(path)
    for name, text in result.extras.items():
        path = out_dir / name
        path.write_text(text)
        files.append(path)
    report_path = out_dir / "report.json"
    report_path.write_text(
        json.dumps({"kind": result.kind, "passed": result.passed, **result.report}, indent=2, default=str)
    )
    files.append(report_path)
    meta_path = out_dir / "meta.json"
    meta = {
        "config": config.model_dump(mode="json"),
        "versions": _versions(),
        "finished_at": datetime.now(timezone.utc).isoformat(),
        "duration_s": result.duration_s,
        "passed": result.passed,
    }
    meta_path.write_text(json.dumps(meta, indent=2))
    files.append(meta_path)
    return files


def run_experiment(
    config: ExperimentConfig,
    out_dir: Path | None = None,
    jobs: int = 1,
    settings: Settings | None = None,
) -> ExperimentResult:
    """Run one experiment and write its artifacts when ``out_dir`` is given.

    Args:
        config: Validated experiment configuration
        out_dir: Directory for results.csv, report.json and meta.json
        jobs: Worker processes for independent cells
        settings: Optional settings override

    Returns:
        ExperimentResult with the verdict, table and report
    """
    settings = settings or get_settings()
    run_id = config.name or uuid.uuid4().hex[:8]
    exp_logger = ExperimentLogger(config.kind, run_id)
    exp_logger.started(seed=config.seed, jobs=jobs)
    start = time.perf_counter()
    try:
        result = RUNNERS[config.kind](config, jobs, settings)
    except Exception as e:
        exp_logger.failed(str(e))
        raise
    result.duration_s = time.perf_counter() - start
    if out_dir is not None:
        result.files = write_outputs(result, config, out_dir)
    exp_logger.completed(result.passed, files=[str(f) for f in result.files])
    return result
