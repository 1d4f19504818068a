"""
Data models for rooted trees, h-set profiles and tree partitions.

Vertices are dense integers 0..V-1. Trees are immutable once built; all
derived arrays (levels, preorder intervals, per-level preorder indices) are
computed in ``RootedTree.from_parents``.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from entropylab.app.core.exceptions import (
    DomainException,
    UnknownVertexException,
    ValidationException,
    ZeroWeightException,
)


class TauKind(str, Enum):
    """Slowly varying factor tau of an h-set profile."""

    CONST = "const"
    LOG_POWER = "log_power"  # tau(t) = log2(t + 2)**nu


@dataclass(frozen=True, eq=False)
class RootedTree:
    """A finite rooted tree with levels and preorder intervals.

    ``tin[v] <= tin[w] < tout[v]`` exactly when w lies in the subtree of v.
    """

    parent: np.ndarray
    level: np.ndarray
    children_of: tuple[tuple[int, ...], ...]
    order: np.ndarray  # breadth-first order
    tin: np.ndarray
    tout: np.ndarray
    level_tins: tuple[np.ndarray, ...]
    level_vertices: tuple[np.ndarray, ...]
    max_branching: int

    @classmethod
    def from_parents(
        cls, parents: Sequence[int] | np.ndarray, max_branching: int | None = None
    ) -> RootedTree:
        """Build a tree from a parent array; the root has parent -1."""
        parent = np.asarray(parents, dtype=np.int64).reshape(-1)
        size = parent.size
        if size == 0:
            raise ValidationException("A tree needs at least one vertex", field="parents")

        roots = np.flatnonzero(parent < 0)
        if roots.size != 1:
            raise ValidationException(
                f"A tree needs exactly one root, found {roots.size}", field="parents"
            )
        if np.any(parent >= size):
            raise ValidationException("Parent ids must be vertex ids", field="parents")

        root = int(roots[0])
        buckets: list[list[int]] = [[] for _ in range(size)]
        for child, par in enumerate(parent.tolist()):
            if par >= 0:
                buckets[par].append(child)
        children_of = tuple(tuple(b) for b in buckets)

        level = np.full(size, -1, dtype=np.int64)
        level[root] = 0
        order = [root]
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for c in children_of[v]:
                level[c] = level[v] + 1
                order.append(c)
                queue.append(c)
        if len(order) != size:
            raise ValidationException("Parent array contains a cycle", field="parents")

        tin = np.empty(size, dtype=np.int64)
        tout = np.empty(size, dtype=np.int64)
        clock = 0
        stack: list[tuple[int, bool]] = [(root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                tout[v] = clock
                continue
            tin[v] = clock
            clock += 1
            stack.append((v, True))
            stack.extend((c, False) for c in reversed(children_of[v]))

        depth = int(level.max())
        by_level = np.argsort(level, kind="stable")
        bounds = np.cumsum(np.bincount(level, minlength=depth + 1))[:-1]
        level_vertices = tuple(np.split(by_level, bounds))
        level_tins = tuple(np.sort(tin[verts]) for verts in level_vertices)

        branching = max((len(c) for c in children_of), default=0)
        if max_branching is None:
            max_branching = max(branching, 1)
        elif branching > max_branching:
            raise ValidationException(
                f"Vertex with {branching} children exceeds branching bound {max_branching}",
                field="max_branching",
            )

        arrays = (parent, level, np.asarray(order, dtype=np.int64), tin, tout)
        for arr in arrays:
            arr.setflags(write=False)
        return cls(
            parent=parent,
            level=level,
            children_of=children_of,
            order=arrays[2],
            tin=tin,
            tout=tout,
            level_tins=level_tins,
            level_vertices=level_vertices,
            max_branching=int(max_branching),
        )

    @classmethod
    def chain(cls, length: int) -> RootedTree:
        return cls.from_parents(np.arange(length) - 1, max_branching=1)

    @classmethod
    def star(cls, leaves: int) -> RootedTree:
        return cls.from_parents([-1] + [0] * leaves)

    @classmethod
    def full(cls, branching: int, depth: int) -> RootedTree:
        """Complete tree with every internal vertex having ``branching`` children."""
        parents = [-1]
        frontier = [0]
        for _ in range(depth):
            nxt = []
            for v in frontier:
                for _ in range(branching):
                    nxt.append(len(parents))
                    parents.append(v)
            frontier = nxt
        return cls.from_parents(parents, max_branching=branching)

    @property
    def size(self) -> int:
        return int(self.parent.size)

    @property
    def root(self) -> int:
        return int(self.order[0])

    @property
    def depth(self) -> int:
        return len(self.level_tins) - 1

    def _check(self, v: int) -> int:
        if not 0 <= v < self.size:
            raise UnknownVertexException(v, self.size)
        return int(v)

    def children(self, v: int) -> tuple[int, ...]:
        return self.children_of[self._check(v)]

    def parent_of(self, v: int) -> int | None:
        par = int(self.parent[self._check(v)])
        return None if par < 0 else par

    def level_counts(self) -> np.ndarray:
        return np.array([arr.size for arr in self.level_tins], dtype=np.int64)

    def vertices_at_level(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.depth:
            return np.empty(0, dtype=np.int64)
        return self.level_vertices[j]

    def subtree_sizes(self) -> np.ndarray:
        return self.tout - self.tin

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when a <= b in the tree order (a lies on the path root..b)."""
        a, b = self._check(a), self._check(b)
        return bool(self.tin[a] <= self.tin[b] < self.tout[a])

    def descendants_at_depth(self, v: int, l: int) -> int:
        """card V_l(v): descendants of v exactly l levels below it."""
        v = self._check(v)
        target = int(self.level[v]) + l
        if l < 0 or target > self.depth:
            return 0
        tins = self.level_tins[target]
        lo = np.searchsorted(tins, self.tin[v], side="left")
        hi = np.searchsorted(tins, self.tout[v], side="left")
        return int(hi - lo)

    def descendant_counts(self, vertices: np.ndarray, depths: np.ndarray) -> np.ndarray:
        """Vectorised ``descendants_at_depth`` over (vertex, l) pairs."""
        vertices = np.asarray(vertices, dtype=np.int64)
        depths = np.asarray(depths, dtype=np.int64)
        targets = self.level[vertices] + depths
        out = np.zeros(vertices.size, dtype=np.int64)
        for target in np.unique(targets):
            if target < 0 or target > self.depth:
                continue
            mask = targets == target
            tins = self.level_tins[int(target)]
            lo = np.searchsorted(tins, self.tin[vertices[mask]], side="left")
            hi = np.searchsorted(tins, self.tout[vertices[mask]], side="left")
            out[mask] = hi - lo
        return out

    def subtree_at(self, v: int) -> frozenset[int]:
        """All vertices w with v <= w, collected breadth first."""
        v = self._check(v)
        seen = [v]
        queue = deque([v])
        while queue:
            x = queue.popleft()
            seen.extend(self.children_of[x])
            queue.extend(self.children_of[x])
        return frozenset(seen)

    def parents_list(self) -> list[int]:
        return [int(p) for p in self.parent]


@dataclass(frozen=True)
class HSetProfile:
    """h(t) = t^theta |log2 t|^gamma tau(|log2 t|) near zero, constant above t_floor."""

    theta: float
    gamma: float = 0.0
    tau_kind: TauKind = TauKind.CONST
    nu: float = 0.0
    m_star: int = 1
    c_star: float = 3.0
    t_floor: float = 0.25
    name: str = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau_kind", TauKind(self.tau_kind))
        if self.theta < 0:
            raise ValidationException("theta must be nonnegative", field="theta")
        if self.m_star < 1:
            raise ValidationException("m_star must be a positive integer", field="m_star")
        if self.c_star < 1:
            raise ValidationException("c_star must be at least 1", field="c_star")
        if not 0.0 < self.t_floor <= 1.0:
            raise ValidationException("t_floor must lie in (0, 1]", field="t_floor")
        if self.t_floor == 1.0 and self.gamma != 0.0:
            raise ValidationException(
                "t_floor = 1 needs gamma = 0 since |log2 1| = 0", field="t_floor"
            )

    def tau(self, t: float) -> float:
        if self.tau_kind is TauKind.CONST:
            return 1.0
        return math.log2(t + 2.0) ** self.nu

    def h(self, t: float) -> float:
        """Evaluate h on (0, 1]."""
        if not (0.0 < t <= 1.0):
            raise DomainException(f"h is defined on (0, 1], got t={t}", argument="t", value=t)
        t = min(t, self.t_floor)
        mag = -math.log2(t)
        return t**self.theta * mag**self.gamma * self.tau(mag)

    def at_level(self, j: int) -> float:
        """h(2^(-m_star j)) with the logarithm taken exactly."""
        mag = float(self.m_star * j)
        if mag <= -math.log2(self.t_floor):
            return self.h(self.t_floor)
        return 2.0 ** (-self.theta * mag) * mag**self.gamma * self.tau(mag)


@dataclass(frozen=True)
class HSetReport:
    """Outcome of checking the two-sided branching condition."""

    max_ratio: float
    min_ratio: float
    c_star: float
    passed: bool
    pairs_checked: int
    worst_vertex: int
    worst_depth: int
    exhaustive: bool

    def to_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "min_ratio": self.min_ratio,
            "c_star": self.c_star,
            "passed": self.passed,
            "pairs_checked": self.pairs_checked,
            "worst_vertex": self.worst_vertex,
            "worst_depth": self.worst_depth,
            "exhaustive": self.exhaustive,
        }


@dataclass(frozen=True, eq=False)
class GeneratedTree:
    """An h-set tree together with its construction diagnostics."""

    tree: RootedTree
    profile: HSetProfile
    targets: np.ndarray  # H_j = h(1) / h(2^(-m_star j))
    deficient_vertices: int = 0


@dataclass(frozen=True, eq=False)
class VertexWeighting:
    """Additive set function Phi(A) = sum of phi over A."""

    phi: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.phi, dtype=float).reshape(-1)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValidationException("Vertex weights must be finite and >= 0", field="phi")
        if arr.sum() <= 0:
            raise ZeroWeightException()
        arr.setflags(write=False)
        object.__setattr__(self, "phi", arr)

    @classmethod
    def uniform(cls, size: int) -> VertexWeighting:
        return cls(np.ones(size))

    @property
    def total(self) -> float:
        return float(self.phi.sum())

    def mass(self, vertices: Iterable[int]) -> float:
        idx = np.fromiter(vertices, dtype=np.int64)
        return float(self.phi[idx].sum()) if idx.size else 0.0


@dataclass(frozen=True, eq=False)
class TreePartition:
    """Partition of a tree's vertices into connected parts.

    Parts are ordered by the id of their root (the minimal vertex of the part).
    """

    parts: tuple[tuple[int, ...], ...]
    part_of: np.ndarray
    part_roots: tuple[int, ...]

    @classmethod
    def from_parts(cls, tree: RootedTree, parts: Iterable[Iterable[int]]) -> TreePartition:
        """Order parts by their shallowest vertex and index every vertex.

        No validity check is made here; see ``verify_partition_lemma``.
        """
        sets = [tuple(sorted(int(v) for v in part)) for part in parts]
        sets = [s for s in sets if s]
        roots = [min(s, key=lambda v: (int(tree.level[v]), v)) for s in sets]
        ranked = sorted(zip(roots, sets, strict=True))
        part_of = np.full(tree.size, -1, dtype=np.int64)
        for index, (_, members) in enumerate(ranked):
            part_of[list(members)] = index
        return cls(
            parts=tuple(s for _, s in ranked),
            part_of=part_of,
            part_roots=tuple(r for r, _ in ranked),
        )

    @classmethod
    def from_labels(cls, tree: RootedTree, labels: Sequence[int]) -> TreePartition:
        groups: dict[int, list[int]] = {}
        for v, label in enumerate(labels):
            groups.setdefault(int(label), []).append(v)
        return cls.from_parts(tree, groups.values())

    def __len__(self) -> int:
        return len(self.parts)

    def succession(self, tree: RootedTree) -> tuple[int, ...]:
        """For each part, the part containing the parent of its root (-1 for the root part)."""
        out = []
        for root in self.part_roots:
            par = int(tree.parent[root])
            out.append(-1 if par < 0 else int(self.part_of[par]))
        return tuple(out)


@dataclass(frozen=True, eq=False)
class BalancedPartitionReport:
    """A balanced partition with the quantities it is judged by."""

    parts: TreePartition
    n: int
    k: int
    parts_count: int
    max_nonsingleton_phi: float
    phi_total: float
    witness_C: float
    threshold: float = 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "parts_count": self.parts_count,
            "max_nonsingleton_phi": self.max_nonsingleton_phi,
            "phi_total": self.phi_total,
            "witness_C": self.witness_C,
            "threshold": self.threshold,
        }


@dataclass
class PartitionVerdict:
    """Result of re-checking a partition from scratch."""

    passed: bool = True
    violations: list[str] = field(default_factory=list)
    max_condition_ratio: float = 0.0
    max_intersections: int = 0

    def fail(self, message: str) -> None:
        self.passed = False
        self.violations.append(message)
