"""Balanced partitions of bounded-branching trees into connected subtrees."""

from __future__ import annotations

import numpy as np
import structlog

from entropylab.app.core.exceptions import ValidationException
from entropylab.app.services.trees.models import (
    BalancedPartitionReport,
    PartitionVerdict,
    RootedTree,
    TreePartition,
    VertexWeighting,
)

logger = structlog.get_logger(__name__)

_PHI_RTOL = 1e-9


def _sweep(
    tree: RootedTree,
    phi: np.ndarray,
    threshold: float,
    forced: np.ndarray,
) -> np.ndarray:
    """Post-order threshold sweep; returns the part label (part root) of every vertex.

    Levels are processed deepest first. A vertex with phi > T becomes a
    singleton and every child component still open is closed on its own. A
    vertex whose open component reaches T closes it. ``forced`` vertices are
    always part roots; the tree root is forced too.
    """
    size = tree.size
    cut = forced.copy()
    cut[tree.root] = True
    acc = np.zeros(size)
    pending = np.zeros(size)

    for j in range(tree.depth, -1, -1):
        verts = tree.vertices_at_level(j)
        weight = phi[verts]
        heavy = weight > threshold
        acc[verts] = np.where(heavy, weight, weight + pending[verts])
        cut[verts] |= heavy | (acc[verts] >= threshold)

        if j + 1 <= tree.depth:
            below = tree.vertices_at_level(j + 1)
            under_heavy = heavy[np.searchsorted(verts, tree.parent[below])]
            cut[below] |= under_heavy

        if j > 0:
            open_verts = verts[~cut[verts]]
            np.add.at(pending, tree.parent[open_verts], acc[open_verts])

    label = np.empty(size, dtype=np.int64)
    for v in tree.order:
        label[v] = v if cut[v] else label[tree.parent[v]]
    return label


def _report(
    tree: RootedTree,
    weighting: VertexWeighting,
    n: int,
    labels: np.ndarray,
    threshold: float,
) -> BalancedPartitionReport:
    partition = TreePartition.from_labels(tree, labels)
    masses = np.bincount(partition.part_of, weights=weighting.phi, minlength=len(partition))
    sizes = np.bincount(partition.part_of, minlength=len(partition))
    heavy_parts = masses[sizes >= 2]
    return BalancedPartitionReport(
        parts=partition,
        n=n,
        k=tree.max_branching,
        parts_count=len(partition),
        max_nonsingleton_phi=float(heavy_parts.max()) if heavy_parts.size else 0.0,
        phi_total=weighting.total,
        witness_C=len(partition) / n,
        threshold=threshold,
    )


def _check_inputs(tree: RootedTree, weighting: VertexWeighting, n: int) -> None:
    if weighting.phi.size != tree.size:
        raise ValidationException(
            f"Weighting has {weighting.phi.size} entries for {tree.size} vertices", field="phi"
        )
    if n < 1:
        raise ValidationException("Number of parts n must be positive", field="n")


def partition_balanced(
    tree: RootedTree,
    weighting: VertexWeighting,
    n: int,
) -> BalancedPartitionReport:
    """Partition into connected parts with threshold T = Phi_total / n.

    Every part with two or more vertices weighs less than (k+1) T, and there
    are at most (k+2) n parts.
    """
    _check_inputs(tree, weighting, n)
    threshold = weighting.total / n
    labels = _sweep(tree, weighting.phi, threshold, np.zeros(tree.size, dtype=bool))
    report = _report(tree, weighting, n, labels, threshold)
    logger.debug(
        "Balanced partition built",
        vertices=tree.size,
        n=n,
        parts=report.parts_count,
        witness_C=report.witness_C,
    )
    return report


def dyadic_chain(
    tree: RootedTree,
    weighting: VertexWeighting,
    depth: int,
) -> list[BalancedPartitionReport]:
    """Nested partitions for n = 1, 2, 4, ..., 2^depth.

    Each level re-sweeps the parts of the previous one with the global
    threshold Phi_total / n, so every part refines exactly one coarser part.
    """
    _check_inputs(tree, weighting, 1)
    if depth < 0:
        raise ValidationException("Chain depth must be nonnegative", field="depth")

    reports = []
    forced = np.zeros(tree.size, dtype=bool)
    for i in range(depth + 1):
        n = 2**i
        threshold = weighting.total / n
        labels = _sweep(tree, weighting.phi, threshold, forced)
        reports.append(_report(tree, weighting, n, labels, threshold))
        forced = np.zeros(tree.size, dtype=bool)
        forced[np.unique(labels)] = True
    return reports


def verify_partition_lemma(
    report: BalancedPartitionReport,
    tree: RootedTree,
    weighting: VertexWeighting,
) -> PartitionVerdict:
    """Recheck a partition from scratch.

    Checks disjoint cover, connectivity of every part, the weight bound
    (k+2) Phi_total / n on parts with at least two vertices, the part-count
    bound (2k+4) n and the succession relation between parts.
    """
    verdict = PartitionVerdict()
    k, n = report.k, report.n
    phi = weighting.phi
    total = float(phi.sum())

    seen = np.zeros(tree.size, dtype=np.int64)
    part_of = np.full(tree.size, -1, dtype=np.int64)
    for index, part in enumerate(report.parts.parts):
        members = np.asarray(part, dtype=np.int64)
        if members.size and (members.min() < 0 or members.max() >= tree.size):
            verdict.fail(f"part {index} contains unknown vertices")
            return verdict
        seen[members] += 1
        part_of[members] = index
    if np.any(seen != 1):
        verdict.fail(
            f"disjoint cover: {int(np.sum(seen == 0))} uncovered, {int(np.sum(seen > 1))} repeated"
        )
        return verdict

    entries = np.zeros(len(report.parts.parts), dtype=np.int64)
    outside = (tree.parent < 0) | (part_of[np.maximum(tree.parent, 0)] != part_of)
    np.add.at(entries, part_of[outside], 1)
    for index in np.flatnonzero(entries != 1):
        verdict.fail(f"connectivity: part {int(index)} has {int(entries[index])} top vertices")

    bound = (k + 2) * total / n
    masses = np.bincount(part_of, weights=phi, minlength=entries.size)
    sizes = np.bincount(part_of, minlength=entries.size)
    multi = sizes >= 2
    if np.any(multi):
        verdict.max_condition_ratio = float(masses[multi].max() / bound)
        for index in np.flatnonzero(multi & (masses > bound * (1 + _PHI_RTOL))):
            verdict.fail(
                f"condition 1: part {int(index)} weighs {masses[index]:.6g} > {bound:.6g}"
            )

    count = entries.size
    if count > report.witness_C * n * (1 + _PHI_RTOL):
        verdict.fail(f"count {count} exceeds witness {report.witness_C} * {n}")
    if count > (2 * k + 4) * n:
        verdict.fail(f"count {count} exceeds (2k+4) n = {(2 * k + 4) * n}")

    if verdict.passed:
        _check_succession(report.parts, tree, verdict)
    return verdict


def _check_succession(partition: TreePartition, tree: RootedTree, verdict: PartitionVerdict) -> None:
    preds = partition.succession(tree)
    tops = [s for s, pred in enumerate(preds) if pred < 0]
    if len(tops) != 1:
        verdict.fail(f"succession: {len(tops)} parts without a predecessor")
        return
    for s, pred in enumerate(preds):
        if pred >= 0 and tree.level[partition.part_roots[pred]] >= tree.level[partition.part_roots[s]]:
            verdict.fail(f"succession: part {s} does not lie below its predecessor {pred}")


def verify_dyadic_chain(
    reports: list[BalancedPartitionReport],
    tree: RootedTree,
    weighting: VertexWeighting,
) -> PartitionVerdict:
    """Check every level of a dyadic chain and the nesting between levels.

    ``max_intersections`` records the largest number of finer parts met by a
    single coarser part.
    """
    verdict = PartitionVerdict()
    for report in reports:
        level = verify_partition_lemma(report, tree, weighting)
        verdict.max_condition_ratio = max(verdict.max_condition_ratio, level.max_condition_ratio)
        for message in level.violations:
            verdict.fail(f"n={report.n}: {message}")

    for coarse, fine in zip(reports, reports[1:], strict=False):
        outer = coarse.parts.part_of
        inner = fine.parts.part_of
        for index, part in enumerate(fine.parts.parts):
            owners = np.unique(outer[list(part)])
            if owners.size != 1:
                verdict.fail(f"nesting: part {index} of n={fine.n} meets {owners.size} parts of n={coarse.n}")
        pairs = np.unique(np.stack([outer, inner], axis=1), axis=0)
        per_coarse = np.bincount(pairs[:, 0], minlength=len(coarse.parts))
        verdict.max_intersections = max(verdict.max_intersections, int(per_coarse.max()))
    return verdict
