"""Finite-dimensional sequence spaces: exponents, l_p norms and unit-ball nets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import structlog
from scipy.spatial.distance import cdist

from entropylab.app.config import Settings, get_settings
from entropylab.app.core.exceptions import ScaleException, ValidationException

logger = structlog.get_logger(__name__)

_INFINITY_ALIASES = {"inf", "infinity", "∞", "+inf"}


@dataclass(frozen=True)
class Exponent:
    """An exponent p in [1, ∞].

    ``finite`` holds the value for p < ∞ and is ``None`` for p = ∞, so the
    reciprocal 1/∞ is exactly zero rather than the reciprocal of a large float.
    """

    finite: float | None

    def __post_init__(self) -> None:
        if self.finite is None:
            return
        value = float(self.finite)
        if not math.isfinite(value) or value < 1.0:
            raise ValidationException(
                f"Exponent must lie in [1, inf], got {self.finite!r}", field="p"
            )
        object.__setattr__(self, "finite", value)

    @classmethod
    def of(cls, value: Any) -> Exponent:
        """Coerce a number, ``math.inf`` or the string ``"inf"`` to an exponent."""
        if isinstance(value, Exponent):
            return value
        if isinstance(value, str):
            text = value.strip().lower()
            if text in _INFINITY_ALIASES:
                return cls(None)
            try:
                value = float(text)
            except ValueError as e:
                raise ValidationException(
                    f"Cannot read exponent from {value!r}", field="p"
                ) from e
        if isinstance(value, (int, float)) and math.isinf(value) and value > 0:
            return cls(None)
        return cls(float(value))

    @classmethod
    def infinity(cls) -> Exponent:
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.finite is None

    @property
    def reciprocal(self) -> float:
        """1/p, exactly 0.0 for p = ∞."""
        return 0.0 if self.finite is None else 1.0 / self.finite

    @property
    def order(self) -> float:
        """The exponent as a float for numpy/scipy calls (``inf`` for ∞)."""
        return math.inf if self.finite is None else self.finite

    def dual(self) -> Exponent:
        """The conjugate exponent p' with 1/p + 1/p' = 1."""
        if self.finite is None:
            return Exponent(1.0)
        if self.finite == 1.0:
            return Exponent(None)
        return Exponent(self.finite / (self.finite - 1.0))

    def __lt__(self, other: Exponent) -> bool:
        return self.order < Exponent.of(other).order

    def __le__(self, other: Exponent) -> bool:
        return self.order <= Exponent.of(other).order

    def __gt__(self, other: Exponent) -> bool:
        return self.order > Exponent.of(other).order

    def __ge__(self, other: Exponent) -> bool:
        return self.order >= Exponent.of(other).order

    def __str__(self) -> str:
        return "inf" if self.finite is None else f"{self.finite:g}"

    def to_json(self) -> float | str:
        return "inf" if self.finite is None else self.finite


INF = Exponent(None)


def dual_exponent(p: Exponent | float | str) -> Exponent:
    """Return p' with 1/p + 1/p' = 1 (1' = ∞, ∞' = 1)."""
    return Exponent.of(p).dual()


@dataclass(frozen=True, eq=False)
class Vector:
    """A nonempty real vector; coordinates are copied and frozen."""

    coords: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coords, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValidationException("Vector needs at least one coordinate", field="coords")
        if not np.all(np.isfinite(arr)):
            raise ValidationException("Vector coordinates must be finite", field="coords")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    def __len__(self) -> int:
        return self.dim

    def scaled(self, factor: float) -> Vector:
        return Vector(self.coords * factor)


def row_norms(points: np.ndarray, p: Exponent | float | str) -> np.ndarray:
    """l_p norms along the last axis.

    Rows are divided by their largest absolute entry before powering, which
    keeps the result homogeneous to rounding and avoids overflow.
    """
    p = Exponent.of(p)
    a = np.abs(np.asarray(points, dtype=float))
    peak = a.max(axis=-1)
    if p.is_infinite:
        return peak
    safe = np.where(peak > 0, peak, 1.0)
    scaled = a / safe[..., None]
    if p.finite == 1.0:
        return peak * scaled.sum(axis=-1)
    return peak * np.sum(scaled**p.finite, axis=-1) ** (1.0 / p.finite)


def norm(v: Vector | np.ndarray | list[float], p: Exponent | float | str) -> float:
    """The l_p norm of a vector; max |x_i| for p = ∞."""
    coords = v.coords if isinstance(v, Vector) else Vector(np.asarray(v)).coords
    return float(row_norms(coords[None, :], p)[0])


def pairwise_distances(
    a: np.ndarray, b: np.ndarray, p: Exponent | float | str
) -> np.ndarray:
    """Matrix of l_p distances between the rows of ``a`` and ``b``."""
    p = Exponent.of(p)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if p.is_infinite:
        return cdist(a, b, metric="chebyshev")
    if p.finite == 1.0:
        return cdist(a, b, metric="cityblock")
    if p.finite == 2.0:
        return cdist(a, b, metric="euclidean")
    return cdist(a, b, metric="minkowski", p=p.finite)


@dataclass(frozen=True, eq=False)
class NetPointSet:
    """Finite net of the closed unit ball of l_p^dim.

    Every point of the ball lies within ``mesh`` (in l_p) of some net point.
    """

    points: np.ndarray
    mesh: float
    p: Exponent
    step: float

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def as_vectors(self) -> list[Vector]:
        return [Vector(row) for row in self.points]

    def distance_to(self, samples: np.ndarray, chunk: int = 256) -> np.ndarray:
        """Distance from each sample to its nearest net point."""
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        out = np.empty(samples.shape[0])
        for start in range(0, samples.shape[0], chunk):
            block = pairwise_distances(samples[start : start + chunk], self.points, self.p)
            out[start : start + chunk] = block.min(axis=1)
        return out


def unit_ball_net(
    dim: int,
    p: Exponent | float | str,
    mesh: float,
    settings: Settings | None = None,
) -> NetPointSet:
    """Axis grid net of the unit ball of l_p^dim with covering radius ``mesh``.

    Rounding every coordinate of a ball point toward zero onto a grid of step
    ``h`` stays inside the ball and moves it by less than ``h`` per coordinate,
    so ``h = mesh * dim**(-1/p)`` certifies the covering radius.
    """
    settings = settings or get_settings()
    p = Exponent.of(p)

    if dim < 1:
        raise ValidationException("Net dimension must be positive", field="dim")
    if dim > settings.oracle_max_dim:
        raise ScaleException(
            f"Ball nets are limited to dimension {settings.oracle_max_dim}, got {dim}",
            limit=f"dim <= {settings.oracle_max_dim}",
        )
    if not 0.0 < mesh <= 1.0:
        raise ValidationException(f"Mesh must lie in (0, 1], got {mesh}", field="mesh")

    step = mesh / dim**p.reciprocal
    half = math.floor(1.0 / step + 1e-9)
    raw = (2 * half + 1) ** dim
    if raw > settings.oracle_max_net_points:
        raise ScaleException(
            f"Net would enumerate {raw} grid points",
            limit=f"grid points <= {settings.oracle_max_net_points}",
            suggestion="Use a coarser mesh or a smaller dimension.",
        )

    axis = np.arange(-half, half + 1, dtype=float) * step
    grid = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    inside = row_norms(grid, p) <= 1.0 + settings.membership_tol
    points = grid[inside]
    points.setflags(write=False)

    logger.debug(
        "Ball net built",
        dim=dim,
        p=str(p),
        mesh=mesh,
        step=step,
        points=int(points.shape[0]),
    )
    return NetPointSet(points=points, mesh=mesh, p=p, step=step)


def sample_unit_ball(
    dim: int,
    p: Exponent | float | str,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw ``count`` points of the l_p unit ball by rejection from the cube."""
    p = Exponent.of(p)
    out: list[np.ndarray] = []
    have = 0
    while have < count:
        batch = rng.uniform(-1.0, 1.0, size=(max(64, 4 * count), dim))
        keep = batch[row_norms(batch, p) <= 1.0]
        out.append(keep)
        have += keep.shape[0]
    return np.concatenate(out)[:count]
