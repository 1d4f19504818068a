"""Line-oriented text formats for trees, partitions and weighted operators.

Trees: one ``id parent level`` line per vertex, ordered by id, root parent -1.
Partitions: one ``id part_index`` line per vertex.
Operators: the tree lines, a blank line, then one ``j u_j w_j`` line per level.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from entropylab.app.core.exceptions import ValidationException
from entropylab.app.services.trees.models import RootedTree, TreePartition


def dump_tree(tree: RootedTree) -> str:
    lines = [f"{v} {int(tree.parent[v])} {int(tree.level[v])}" for v in range(tree.size)]
    return "\n".join(lines) + "\n"


def _rows(text: str, width: int, what: str) -> list[list[str]]:
    rows = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != width:
            raise ValidationException(
                f"{what} line {number}: expected {width} fields, got {len(fields)}",
                field=what,
            )
        rows.append(fields)
    return rows


def load_tree(text: str, max_branching: int | None = None) -> RootedTree:
    """Parse ``dump_tree`` output; stated levels must match the parent structure."""
    try:
        rows = np.array(_rows(text, 3, "tree"), dtype=np.int64).reshape(-1, 3)
    except ValueError as e:
        raise ValidationException("Tree lines must hold integers", field="tree") from e
    if rows.shape[0] == 0:
        raise ValidationException("Tree text holds no vertices", field="tree")
    ids = rows[:, 0]
    if not np.array_equal(np.sort(ids), np.arange(ids.size)):
        raise ValidationException("Vertex ids must be 0..V-1 without gaps", field="tree")

    parents = np.empty(ids.size, dtype=np.int64)
    levels = np.empty(ids.size, dtype=np.int64)
    parents[ids] = rows[:, 1]
    levels[ids] = rows[:, 2]
    tree = RootedTree.from_parents(parents, max_branching=max_branching)
    if not np.array_equal(tree.level, levels):
        raise ValidationException("Stated levels disagree with the parent structure", field="tree")
    return tree


def dump_partition(partition: TreePartition) -> str:
    return "".join(f"{v} {int(p)}\n" for v, p in enumerate(partition.part_of))


def load_partition(text: str, tree: RootedTree) -> TreePartition:
    try:
        rows = np.array(_rows(text, 2, "partition"), dtype=np.int64).reshape(-1, 2)
    except ValueError as e:
        raise ValidationException("Partition lines must hold integers", field="partition") from e
    if rows.shape[0] != tree.size or not np.array_equal(np.sort(rows[:, 0]), np.arange(tree.size)):
        raise ValidationException("Partition must list every vertex exactly once", field="partition")
    labels = np.empty(tree.size, dtype=np.int64)
    labels[rows[:, 0]] = rows[:, 1]
    return TreePartition.from_labels(tree, labels)


def dump_operator(tree: RootedTree, u_levels: Sequence[float], w_levels: Sequence[float]) -> str:
    """Tree lines followed by the levelwise weights, printed to full precision."""
    weights = "".join(
        f"{j} {float(u)!r} {float(w)!r}\n"
        for j, (u, w) in enumerate(zip(u_levels, w_levels, strict=True))
    )
    return dump_tree(tree) + "\n" + weights


def load_operator(text: str) -> tuple[RootedTree, np.ndarray, np.ndarray]:
    head, _, tail = text.partition("\n\n")
    tree = load_tree(head)
    rows = _rows(tail, 3, "weights")
    if len(rows) != tree.depth + 1:
        raise ValidationException(
            f"Expected {tree.depth + 1} weight lines, got {len(rows)}", field="weights"
        )
    table = np.array(rows, dtype=float)
    order = np.argsort(table[:, 0])
    return tree, table[order, 1], table[order, 2]
