"""Data models for entropy numbers and their bounds."""

from __future__ import annotations

import hashlib
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

import numpy as np
from scipy import integrate
from scipy.special import zeta

from entropylab.app.core.exceptions import DivergenceException, ValidationException
from entropylab.app.services.spaces import Exponent


class BoundKind(str, Enum):
    """Direction of a certified bound."""

    UPPER = "upper"
    LOWER = "lower"


class OracleMethod(str, Enum):
    """How an entropy bracket was obtained."""

    ZERO = "zero"  # T = 0
    LINE = "line"  # one-dimensional image, solved exactly on the net
    FARTHEST_POINT = "farthest-point"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense operator from l_p^n to l_q^m (rows = target, columns = source)."""

    entries: np.ndarray
    source_p: Exponent
    target_q: Exponent

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float, ndmin=2)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationException("Operator needs a nonempty 2-D matrix", field="entries")
        if not np.all(np.isfinite(arr)):
            raise ValidationException("Operator entries must be finite", field="entries")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "source_p", Exponent.of(self.source_p))
        object.__setattr__(self, "target_q", Exponent.of(self.target_q))

    @classmethod
    def identity(cls, dim: int, p, q) -> OperatorMatrix:
        return cls(np.eye(dim), p, q)

    @classmethod
    def diagonal(cls, values: Sequence[float], p, q) -> OperatorMatrix:
        return cls(np.diag(np.asarray(values, dtype=float)), p, q)

    @property
    def source_dim(self) -> int:
        return int(self.entries.shape[1])

    @property
    def target_dim(self) -> int:
        return int(self.entries.shape[0])

    @property
    def is_zero(self) -> bool:
        return not np.any(self.entries)

    def scaled(self, factor: float) -> OperatorMatrix:
        return OperatorMatrix(self.entries * factor, self.source_p, self.target_q)

    def __add__(self, other: OperatorMatrix) -> OperatorMatrix:
        if (
            self.entries.shape != other.entries.shape
            or self.source_p != other.source_p
            or self.target_q != other.target_q
        ):
            raise ValidationException("Summands must share shape and spaces", field="entries")
        return OperatorMatrix(self.entries + other.entries, self.source_p, self.target_q)

    def compose(self, inner: OperatorMatrix) -> OperatorMatrix:
        """The product self ∘ inner."""
        if inner.target_dim != self.source_dim or inner.target_q != self.source_p:
            raise ValidationException(
                "Inner operator must land in the source space of the outer one",
                field="entries",
            )
        return OperatorMatrix(self.entries @ inner.entries, inner.source_p, self.target_q)

    def fingerprint(self) -> str:
        """Stable hash of entries and exponents."""
        digest = hashlib.sha256(np.ascontiguousarray(self.entries).tobytes())
        digest.update(f"{self.entries.shape}|{self.source_p}|{self.target_q}".encode())
        return digest.hexdigest()

    def to_dict(self) -> dict:
        return {
            "entries": self.entries.tolist(),
            "p": self.source_p.to_json(),
            "q": self.target_q.to_json(),
        }


@dataclass(frozen=True)
class EntropyInterval:
    """Certified bracket lower <= e_k(T) <= upper."""

    k: int
    lower: float
    upper: float
    net_mesh: float
    norm_bound: float
    method: OracleMethod = OracleMethod.FARTHEST_POINT

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationException("Entropy index k starts at 1", field="k")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValidationException("Entropy bracket must be finite", field="lower")
        if self.lower < 0 or self.lower > self.upper:
            raise ValidationException(
                f"Invalid bracket [{self.lower}, {self.upper}]", field="lower"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "lower": self.lower,
            "upper": self.upper,
            "net_mesh": self.net_mesh,
            "norm_bound": self.norm_bound,
            "method": self.method.value,
        }


@dataclass(frozen=True)
class BoundSequence:
    """Certified bounds on e_1, ..., e_K of one operator.

    Entropy numbers are nonincreasing, so upper bounds are replaced by their
    running minimum and lower bounds by the running maximum from the right.
    """

    values: tuple[float, ...]
    kind: BoundKind = BoundKind.UPPER

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationException("Bound sequence needs at least one value", field="values")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValidationException("Bounds must be finite and nonnegative", field="values")
        kind = BoundKind(self.kind)
        if kind is BoundKind.UPPER:
            arr = np.minimum.accumulate(arr)
        else:
            arr = np.maximum.accumulate(arr[::-1])[::-1]
        object.__setattr__(self, "values", tuple(float(v) for v in arr))
        object.__setattr__(self, "kind", kind)

    def __len__(self) -> int:
        return len(self.values)

    def at(self, k: int) -> float:
        """Bound on e_k (1-based)."""
        if not 1 <= k <= len(self.values):
            raise ValidationException(f"Index {k} outside 1..{len(self.values)}", field="k")
        return self.values[k - 1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)


@dataclass(frozen=True)
class TailLowerBound:
    """Order-only lower rate omega_n with the doubling constant observed up to 2n."""

    n: int
    value: float
    doubling_constant: float
    certified: bool = False


# =============================================================================
# Sequence profiles for diagonal operators
# =============================================================================


class SequenceProfile(Protocol):
    """A nonincreasing nonnegative sequence sigma_1, sigma_2, ..."""

    def value(self, k: int) -> float: ...

    def tail_power_sum(self, n: int, s: float) -> float:
        """Sum over k >= n of sigma_k**s."""
        ...


@dataclass(frozen=True)
class GeometricSequence:
    """sigma_k = scale * ratio**k."""

    scale: float = 1.0
    ratio: float = 0.5

    def __post_init__(self) -> None:
        if self.scale < 0:
            raise ValidationException("Sequence scale must be nonnegative", field="scale")
        if not 0.0 <= self.ratio < 1.0:
            raise DivergenceException(
                f"Geometric ratio {self.ratio} does not give a summable sequence"
            )

    def value(self, k: int) -> float:
        return self.scale * self.ratio**k

    def tail_power_sum(self, n: int, s: float) -> float:
        if self.scale == 0.0 or self.ratio == 0.0:
            return 0.0
        r = self.ratio**s
        return self.scale**s * r**n / (1.0 - r)


@dataclass(frozen=True)
class PowerLawSequence:
    """sigma_k = scale * k**(-exponent); tails are Hurwitz zeta values."""

    scale: float = 1.0
    exponent: float = 1.0

    def __post_init__(self) -> None:
        if self.scale < 0 or self.exponent <= 0:
            raise ValidationException(
                "Power law needs scale >= 0 and a positive exponent", field="exponent"
            )

    def value(self, k: int) -> float:
        return self.scale * float(k) ** (-self.exponent)

    def tail_power_sum(self, n: int, s: float) -> float:
        if self.scale == 0.0:
            return 0.0
        power = self.exponent * s
        if power <= 1.0:
            raise DivergenceException(
                f"Sum of k**(-{power:g}) diverges", exponent=power
            )
        return self.scale**s * float(zeta(power, n))


@dataclass(frozen=True)
class FiniteSequence:
    """sigma_1..sigma_L as listed, zero afterwards."""

    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if np.any(arr < 0) or np.any(np.diff(arr) > 0):
            raise ValidationException(
                "Finite sequence must be nonnegative and nonincreasing", field="values"
            )
        object.__setattr__(self, "values", tuple(float(v) for v in arr))

    def value(self, k: int) -> float:
        return self.values[k - 1] if 1 <= k <= len(self.values) else 0.0

    def tail_power_sum(self, n: int, s: float) -> float:
        tail = np.asarray(self.values[max(n, 1) - 1 :], dtype=float)
        tail = tail[tail > 0]
        return float(np.sum(tail**s)) if tail.size else 0.0


@dataclass(frozen=True)
class CallableSequence:
    """sigma_k = func(k) for a nonincreasing func without a closed-form tail.

    Tails are summed directly until the integral-test remainder
    int_K^inf func(x)**s dx drops below ``rtol`` of the partial sum.
    """

    func: Callable[[float], float]
    rtol: float = 1e-10
    block: int = 1024
    max_terms: int = 10_000_000
    label: str = field(default="callable")

    def value(self, k: int) -> float:
        return float(self.func(k))

    def tail_power_sum(self, n: int, s: float) -> float:
        partial = 0.0
        start = n
        while start - n < self.max_terms:
            ks = np.arange(start, start + self.block, dtype=float)
            terms = np.array([self.func(k) for k in ks], dtype=float)
            partial += float(np.sum(terms**s))
            start += self.block
            remainder, _ = integrate.quad(
                lambda x: float(self.func(x)) ** s, start - 1, np.inf, limit=200
            )
            if not math.isfinite(remainder):
                raise DivergenceException(f"Tail of {self.label} diverges", exponent=s)
            if partial == 0.0 or remainder <= self.rtol * partial:
                return partial
        raise DivergenceException(
            f"Tail of {self.label} did not settle within {self.max_terms} terms",
            exponent=s,
        )
