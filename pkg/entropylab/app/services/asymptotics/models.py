"""Data models for closed-form envelopes, growth inversion and rate fitting."""

from __future__ import annotations

import io
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from entropylab.app.core.exceptions import ValidationException
from entropylab.app.services.spaces import Exponent


class EnvelopeSide(str, Enum):
    """Which family of results an envelope belongs to."""

    TREE = "tree"
    SOBOLEV = "sobolev"


def log_power(y: float, exponent: float) -> float:
    """log2(y + 2)**exponent, the slowly varying factors rho and tau."""
    if exponent == 0.0:
        return 1.0
    return math.log2(y + 2.0) ** exponent


@dataclass(frozen=True)
class EnvelopeParams:
    """Parameters of a tree-side or Sobolev-side envelope.

    Tree side: h-set data (theta, gamma, nu), weights u and w, exponents.
    Sobolev side: smoothness r in dimension d, weights g and v, exponents.
    rho and tau are taken in the form log2(y + 2)**(-lambda) and log2(y + 2)**nu.
    """

    side: EnvelopeSide = EnvelopeSide.TREE
    p: float | str = 2.0
    q: float | str = 2.0
    theta: float = 1.0
    gamma: float = 0.0
    nu: float = 0.0
    # tree side
    kappa_u: float = 0.0
    kappa_w: float = 0.0
    alpha_u: float = 0.0
    alpha_w: float = 0.0
    lambda_u: float = 0.0
    lambda_w: float = 0.0
    m_star: int = 1
    # sobolev side
    r: float = 1.0
    d: int = 1
    beta_g: float = 0.0
    beta_v: float = 0.0
    alpha_g: float = 0.0
    alpha_v: float = 0.0
    lambda_g: float = 0.0
    lambda_v: float = 0.0
    singleton: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "side", EnvelopeSide(self.side))
        Exponent.of(self.p)
        Exponent.of(self.q)
        if self.side is EnvelopeSide.SOBOLEV and self.d < 1:
            raise ValidationException("Dimension d must be positive", field="d")

    @property
    def p_exp(self) -> Exponent:
        return Exponent.of(self.p)

    @property
    def q_exp(self) -> Exponent:
        return Exponent.of(self.q)

    @property
    def gap(self) -> float:
        """1/q - 1/p."""
        return self.q_exp.reciprocal - self.p_exp.reciprocal

    @property
    def gap_plus(self) -> float:
        return max(self.gap, 0.0)

    @property
    def kappa(self) -> float:
        return self.kappa_u + self.kappa_w

    @property
    def alpha(self) -> float:
        if self.side is EnvelopeSide.TREE:
            return self.alpha_u + self.alpha_w
        return self.alpha_g + self.alpha_v

    @property
    def lam(self) -> float:
        if self.side is EnvelopeSide.TREE:
            return self.lambda_u + self.lambda_w
        return self.lambda_g + self.lambda_v

    @property
    def delta(self) -> float:
        """r + d/q - d/p."""
        return self.r + self.d * self.gap

    @property
    def beta(self) -> float:
        return self.beta_g + self.beta_v

    def rho(self, y: float) -> float:
        return log_power(y, -self.lam)

    def tau(self, y: float) -> float:
        return log_power(y, self.nu)


@dataclass(frozen=True)
class EnvelopeValue:
    """Envelope value with its leading exponents of n and log2 n."""

    theorem: str
    case_id: str
    value: float
    power: float
    log_power: float

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "case_id": self.case_id,
            "value": self.value,
            "power": self.power,
            "log_power": self.log_power,
        }


@dataclass(frozen=True)
class LogPowerProfile:
    """psi(y) = (log2 y)^log_power * log2(log2 y + 2)^loglog_power."""

    log_power: float = 0.0
    loglog_power: float = 0.0

    @property
    def trivial(self) -> bool:
        return self.log_power == 0.0 and self.loglog_power == 0.0

    def __call__(self, y: float) -> float:
        if self.trivial:
            return 1.0
        t = math.log2(y)
        return t**self.log_power * log_power(t, self.loglog_power)


@dataclass(frozen=True)
class GrowthSolution:
    """Solution y of y^gamma psi(y) = x with a comparison against the closed form."""

    x: float
    y: float
    residual: float
    x0: float
    asymptotic: float
    asymptotic_ratio: float

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "residual": self.residual,
            "x0": self.x0,
            "asymptotic": self.asymptotic,
            "asymptotic_ratio": self.asymptotic_ratio,
        }


@dataclass(frozen=True)
class SlowlyVaryingReport:
    constant: float
    epsilon: float
    cap: float
    passed: bool


@dataclass(frozen=True)
class SlopeFit:
    """log2 value ~ power * log2 n + log_power * log2 log2 n + intercept."""

    power: float
    log_power: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {
            "power": self.power,
            "log_power": self.log_power,
            "intercept": self.intercept,
            "residual": self.residual,
        }


@dataclass(frozen=True, eq=False)
class RateSeries:
    """Pairs (n, value) with n strictly increasing and values positive."""

    n: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        n = np.asarray(self.n, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if n.size != values.size:
            raise ValidationException("n and values must have equal length", field="values")
        if n.size and np.any(np.diff(n) <= 0):
            raise ValidationException("n must be strictly increasing", field="n")
        if np.any(values <= 0) or not np.all(np.isfinite(values)):
            raise ValidationException("Rate values must be positive and finite", field="values")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.n.size)

    @classmethod
    def from_function(cls, func: Callable[[float], float], grid: Sequence[float]) -> RateSeries:
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.array([func(float(n)) for n in grid]))

    @classmethod
    def dyadic(cls, func: Callable[[float], float], start: int, stop: int) -> RateSeries:
        """Values at n = 2^start, ..., 2^stop."""
        return cls.from_function(func, [2.0**e for e in range(start, stop + 1)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"n": self.n, "value": self.values})

    def to_csv(self, path: Path | None = None) -> str:
        """CSV with header ``n,value`` at full precision."""
        text = self.to_frame().to_csv(index=False, float_format="%.17g")
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> RateSeries:
        """Read a series from a CSV path or CSV text."""
        if isinstance(source, Path) or "\n" not in str(source):
            frame = pd.read_csv(source, float_precision="round_trip")
        else:
            frame = pd.read_csv(io.StringIO(str(source)), float_precision="round_trip")
        if list(frame.columns) != ["n", "value"]:
            raise ValidationException("Rate CSV needs the header n,value", field="csv")
        return cls(frame["n"].to_numpy(dtype=float), frame["value"].to_numpy(dtype=float))
