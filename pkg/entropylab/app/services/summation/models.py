"""Data models for two-weighted summation operators on trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from entropylab.app.core.exceptions import UnknownVertexException, ValidationException
from entropylab.app.services.spaces import Exponent
from entropylab.app.services.trees.models import RootedTree

_EQ_TOL = 1e-12


class RhoKind(str, Enum):
    """Slowly varying factor of a weight sequence."""

    CONST = "const"
    LOG_POWER = "log_power"  # rho(t) = log2(t + 2)**(-lambda)


def rho_value(kind: RhoKind, lam: float, t: float) -> float:
    if kind is RhoKind.CONST:
        return 1.0
    return math.log2(t + 2.0) ** (-lam)


@dataclass(frozen=True)
class WeightProfile:
    """u_j = 2^(-kappa_u m j) (m j + 1)^(-alpha_u) rho_u(m j + 1), and w_j alike."""

    kappa_u: float = 0.0
    alpha_u: float = 0.0
    rho_u_kind: RhoKind = RhoKind.CONST
    lambda_u: float = 0.0
    kappa_w: float = 0.0
    alpha_w: float = 0.0
    rho_w_kind: RhoKind = RhoKind.CONST
    lambda_w: float = 0.0
    m_star: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho_u_kind", RhoKind(self.rho_u_kind))
        object.__setattr__(self, "rho_w_kind", RhoKind(self.rho_w_kind))
        if self.m_star < 1:
            raise ValidationException("m_star must be a positive integer", field="m_star")

    @property
    def kappa(self) -> float:
        return self.kappa_u + self.kappa_w

    @property
    def alpha(self) -> float:
        return self.alpha_u + self.alpha_w

    @property
    def lam(self) -> float:
        return (self.lambda_u if self.rho_u_kind is RhoKind.LOG_POWER else 0.0) + (
            self.lambda_w if self.rho_w_kind is RhoKind.LOG_POWER else 0.0
        )

    def rho(self, y: float) -> float:
        """rho = rho_u * rho_w."""
        return rho_value(self.rho_u_kind, self.lambda_u, y) * rho_value(
            self.rho_w_kind, self.lambda_w, y
        )

    def u_level(self, j: int) -> float:
        t = self.m_star * j
        return (
            2.0 ** (-self.kappa_u * t)
            * (t + 1.0) ** (-self.alpha_u)
            * rho_value(self.rho_u_kind, self.lambda_u, t + 1.0)
        )

    def w_level(self, j: int) -> float:
        t = self.m_star * j
        return (
            2.0 ** (-self.kappa_w * t)
            * (t + 1.0) ** (-self.alpha_w)
            * rho_value(self.rho_w_kind, self.lambda_w, t + 1.0)
        )

    def satisfies_muck(self, theta: float, gamma: float, q: Exponent | float | str) -> bool:
        """kappa_w > theta/q, or kappa_w = theta/q and alpha_w > (1 - gamma)/q."""
        rq = Exponent.of(q).reciprocal
        edge = theta * rq
        if self.kappa_w > edge + _EQ_TOL:
            return True
        return abs(self.kappa_w - edge) <= _EQ_TOL and self.alpha_w > (1.0 - gamma) * rq + _EQ_TOL


@dataclass(frozen=True, eq=False)
class SummationOperator:
    """S f(xi) = w(xi) * sum over xi' <= xi of u(xi') f(xi'), from l_p to l_q of the tree."""

    tree: RootedTree
    u: np.ndarray
    w: np.ndarray
    p: Exponent
    q: Exponent
    levelwise: bool = False

    def __post_init__(self) -> None:
        u = np.array(self.u, dtype=float).reshape(-1)
        w = np.array(self.w, dtype=float).reshape(-1)
        if u.size != self.tree.size or w.size != self.tree.size:
            raise ValidationException("Weights need one value per vertex", field="u")
        if np.any(u <= 0) or np.any(w <= 0) or not np.all(np.isfinite(u * w)):
            raise ValidationException("Weights must be positive and finite", field="u")
        u.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "p", Exponent.of(self.p))
        object.__setattr__(self, "q", Exponent.of(self.q))

    @classmethod
    def from_profile(
        cls,
        tree: RootedTree,
        profile: WeightProfile,
        p: Exponent | float | str,
        q: Exponent | float | str,
        offset: int = 0,
    ) -> SummationOperator:
        """Levelwise weights; ``offset`` shifts levels, for subtrees of a larger tree."""
        levels = np.arange(tree.depth + 1) + offset
        u_levels = np.array([profile.u_level(j) for j in levels])
        w_levels = np.array([profile.w_level(j) for j in levels])
        return cls(
            tree=tree,
            u=u_levels[tree.level],
            w=w_levels[tree.level],
            p=Exponent.of(p),
            q=Exponent.of(q),
            levelwise=True,
        )

    @classmethod
    def from_levels(
        cls,
        tree: RootedTree,
        u_levels: np.ndarray,
        w_levels: np.ndarray,
        p: Exponent | float | str,
        q: Exponent | float | str,
    ) -> SummationOperator:
        u_levels = np.asarray(u_levels, dtype=float)
        w_levels = np.asarray(w_levels, dtype=float)
        if u_levels.size != tree.depth + 1 or w_levels.size != tree.depth + 1:
            raise ValidationException("Need one weight per level", field="u")
        return cls(tree, u_levels[tree.level], w_levels[tree.level], p, q, levelwise=True)

    @property
    def size(self) -> int:
        return self.tree.size

    def level_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """(u_j, w_j) per level; only meaningful for levelwise operators."""
        firsts = np.array([verts[0] for verts in self.tree.level_vertices])
        return self.u[firsts], self.w[firsts]

    def scaled(self, u_factor: float = 1.0, w_factor: float = 1.0) -> SummationOperator:
        return SummationOperator(
            self.tree, self.u * u_factor, self.w * w_factor, self.p, self.q, self.levelwise
        )

    def with_exponents(self, p, q) -> SummationOperator:
        return SummationOperator(self.tree, self.u, self.w, p, q, self.levelwise)

    def restrict(self, v: int) -> SummationOperator:
        """The operator on the subtree rooted at v, vertices relabelled in preorder."""
        tree = self.tree
        if not 0 <= v < tree.size:
            raise UnknownVertexException(v, tree.size)
        members = np.argsort(tree.tin)[tree.tin[v] : tree.tout[v]]
        index = np.full(tree.size, -1, dtype=np.int64)
        index[members] = np.arange(members.size)
        parents = np.where(members == v, -1, index[tree.parent[members]])
        sub = RootedTree.from_parents(parents, max_branching=tree.max_branching)
        return SummationOperator(
            sub, self.u[members], self.w[members], self.p, self.q, self.levelwise
        )


class NormMethod(str, Enum):
    """How an operator norm value was obtained."""

    COLUMN = "column"  # p = 1, exact
    ALL_ONES = "all-ones"  # p = inf, exact
    POWER = "power-iteration"  # p = q = 2, certified bracket
    ASCENT = "duality-ascent"  # general p, q, lower bound


@dataclass(frozen=True)
class NormResult:
    """Operator norm with a certified bracket lower <= norm <= upper."""

    value: float
    lower: float
    upper: float
    method: NormMethod
    iterations: int = 0

    @property
    def exact(self) -> bool:
        return self.method is not NormMethod.ASCENT

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "method": self.method.value,
            "iterations": self.iterations,
        }


@dataclass(frozen=True, eq=False)
class NormEstimate:
    """Best multistart value; ||S witness||_q / ||witness||_p certifies it from below."""

    lower_bound: float
    witness: np.ndarray
    starts: int
    best_start: int


@dataclass(frozen=True)
class CjValue:
    case_id: str
    value: float


@dataclass
class CjBandResult:
    """Ratios of subtree operator norms to C(j) across levels."""

    case_id: str
    js: list[int] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    envelopes: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    exact: bool = True
    band: float = 0.0

    @property
    def spread(self) -> float:
        if not self.ratios:
            return 1.0
        return max(self.ratios) / min(self.ratios)

    @property
    def passed(self) -> bool:
        return self.spread <= self.band

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "js": self.js,
            "norms": self.norms,
            "envelopes": self.envelopes,
            "ratios": self.ratios,
            "spread": self.spread,
            "band": self.band,
            "exact": self.exact,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class BlockLowerResult:
    """M times a lower value for e_n of the m-dimensional identity."""

    value: float
    certified: bool
    n: int
    m: int
    level: int
    vertices: tuple[int, ...]
    min_block_norm: float
    identity_value: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "certified": self.certified,
            "n": self.n,
            "m": self.m,
            "level": self.level,
            "vertices": list(self.vertices),
            "min_block_norm": self.min_block_norm,
            "identity_value": self.identity_value,
        }
