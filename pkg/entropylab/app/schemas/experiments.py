"""Experiment configuration schemas.

An experiment is one JSON document whose ``kind`` selects the parameter block.
Every document carries a seed, so a run is reproducible from the file alone.
"""

from typing import Annotated, Any, Literal, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, TypeAdapter, model_validator
from pydantic import ValidationError as PydanticValidationError

from entropylab.app.core.exceptions import EntropyLabException, ValidationException
from entropylab.app.services.spaces import Exponent


def _exponent(value: float | str) -> float | str:
    try:
        return Exponent.of(value).to_json()
    except EntropyLabException as e:
        raise ValueError(e.message) from e


ExponentValue = Annotated[float | str, AfterValidator(_exponent)]

SEED_MAX = 2**64 - 1


class ExperimentBase(BaseModel):
    """Fields shared by every experiment kind."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0, le=SEED_MAX, description="64-bit seed")
    output: str | None = Field(default=None, description="Output directory")
    name: str | None = Field(default=None, description="Run label")


# =============================================================================
# Entropy numbers
# =============================================================================


class EntropyOracleConfig(ExperimentBase):
    """Oracle brackets of e_k(T) for an explicit small matrix."""

    kind: Literal["entropy-oracle"] = "entropy-oracle"
    matrix: list[list[float]] = Field(..., min_length=1)
    p: ExponentValue = "inf"
    q: ExponentValue = "inf"
    ks: list[int] = Field(default_factory=lambda: list(range(1, 7)), min_length=1)
    mesh: float = Field(default=0.005, gt=0, le=0.5)

    @model_validator(mode="after")
    def _rectangular(self) -> "EntropyOracleConfig":
        widths = {len(row) for row in self.matrix}
        if len(widths) != 1 or 0 in widths:
            raise ValueError("matrix rows must be nonempty and of equal length")
        return self


class SchuttBandConfig(ExperimentBase):
    """Ratio of the identity envelope to oracle midpoints."""

    kind: Literal["schutt-band"] = "schutt-band"
    dims: list[int] = Field(default_factory=lambda: [2, 3, 4], min_length=1)
    exponents: list[ExponentValue] = Field(default_factory=lambda: [1.0, 2.0, "inf"], min_length=1)
    ks: list[int] = Field(default_factory=lambda: list(range(1, 9)), min_length=1)
    mesh: float = Field(default=0.1, gt=0, le=0.5)
    band: float | None = Field(default=None, ge=1.0, description="Defaults to schutt_band")


class SequenceSpec(BaseModel):
    """A diagonal sequence: geometric, power law or finite."""

    model_config = ConfigDict(extra="forbid")

    type: Literal["geometric", "power", "finite"] = "geometric"
    scale: float = Field(default=1.0, ge=0)
    ratio: float = 0.5
    exponent: float = 1.0
    values: list[float] = Field(default_factory=list)


class KuhnConfig(ExperimentBase):
    """Tail quantities omega_n of a diagonal operator and their doubling constant."""

    kind: Literal["kuhn"] = "kuhn"
    sequence: SequenceSpec = Field(default_factory=SequenceSpec)
    p: ExponentValue = 2.0
    q: ExponentValue = 1.0
    ns: list[int] = Field(default_factory=lambda: [1, 2, 4, 8, 16, 32], min_length=1)
    doubling_n: int = Field(default=16, ge=1)


# =============================================================================
# Trees
# =============================================================================


class HSetProfileSpec(BaseModel):
    """A preset name, optionally overridden field by field."""

    model_config = ConfigDict(extra="forbid")

    preset: str | None = "binary"
    theta: float | None = None
    gamma: float | None = None
    tau_kind: Literal["const", "log_power"] | None = None
    nu: float | None = None
    m_star: int | None = Field(default=None, ge=1)
    c_star: float | None = Field(default=None, ge=1.0)
    t_floor: float | None = Field(default=None, gt=0, le=1)

    def overrides(self) -> dict[str, Any]:
        return {
            key: value
            for key, value in self.model_dump(exclude={"preset"}).items()
            if value is not None
        }


class TreeGenConfig(ExperimentBase):
    """Generate an h-set tree and verify its descendant counts."""

    kind: Literal["tree-gen"] = "tree-gen"
    profile: HSetProfileSpec = Field(default_factory=HSetProfileSpec)
    depth: int = Field(default=8, ge=0)
    sample: int | None = Field(default=None, ge=1)


class PartitionFuzzConfig(ExperimentBase):
    """Balanced partitions of random trees checked against their guarantees."""

    kind: Literal["partition-fuzz"] = "partition-fuzz"
    trees: int | None = Field(default=None, ge=1, description="Defaults to acceptance size")
    max_vertices: int | None = Field(default=None, ge=1)
    branchings: list[int] = Field(default_factory=lambda: [2, 3, 5], min_length=1)
    chain_depth: int = Field(default=3, ge=1)


# =============================================================================
# Summation operators
# =============================================================================


class WeightProfileSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kappa_u: float = 0.0
    alpha_u: float = 0.0
    rho_u_kind: Literal["const", "log_power"] = "const"
    lambda_u: float = 0.0
    kappa_w: float = 0.0
    alpha_w: float = 0.0
    rho_w_kind: Literal["const", "log_power"] = "const"
    lambda_w: float = 0.0
    m_star: int = Field(default=1, ge=1)


class SumopNormConfig(ExperimentBase):
    """Ascent estimates against exact norms on random weighted trees."""

    kind: Literal["sumop-norm"] = "sumop-norm"
    trees: int | None = Field(default=None, ge=1)
    max_vertices: int | None = Field(default=None, ge=1)
    regimes: list[tuple[ExponentValue, ExponentValue]] = Field(
        default_factory=lambda: [(1.0, 1.0), (1.0, 2.0), ("inf", 2.0), (2.0, 2.0)],
        min_length=1,
    )
    rtol: float = Field(default=1e-6, gt=0)


class CjBandConfig(ExperimentBase):
    """Subtree norms against C(j) on a generated h-set tree."""

    kind: Literal["cj-band"] = "cj-band"
    weights: WeightProfileSpec = Field(
        default_factory=lambda: WeightProfileSpec(kappa_u=0.5, kappa_w=1.5)
    )
    profile: HSetProfileSpec = Field(default_factory=HSetProfileSpec)
    p: ExponentValue = 1.0
    q: ExponentValue = 1.0
    j_min: int = Field(default=2, ge=2)
    j_max: int = Field(default=8, ge=2)
    extra_depth: int = Field(default=6, ge=0)
    band: float | None = Field(default=None, ge=1.0)

    @model_validator(mode="after")
    def _ordered(self) -> "CjBandConfig":
        if self.j_max < self.j_min:
            raise ValueError("j_max must not be below j_min")
        return self


# =============================================================================
# Asymptotics
# =============================================================================


class EnvelopeParamsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    side: Literal["tree", "sobolev"] = "tree"
    p: ExponentValue = 2.0
    q: ExponentValue = 2.0
    theta: float = 1.0
    gamma: float = 0.0
    nu: float = 0.0
    kappa_u: float = 0.0
    kappa_w: float = 0.0
    alpha_u: float = 0.0
    alpha_w: float = 0.0
    lambda_u: float = 0.0
    lambda_w: float = 0.0
    m_star: int = Field(default=1, ge=1)
    r: float = 1.0
    d: int = Field(default=1, ge=1)
    beta_g: float = 0.0
    beta_v: float = 0.0
    alpha_g: float = 0.0
    alpha_v: float = 0.0
    lambda_g: float = 0.0
    lambda_v: float = 0.0
    singleton: bool = False


class EnvelopeConfig(ExperimentBase):
    """Envelope values on the dyadic grid n = 2^start .. 2^stop."""

    kind: Literal["envelope"] = "envelope"
    params: EnvelopeParamsSpec = Field(
        default_factory=lambda: EnvelopeParamsSpec(kappa_u=0.5, kappa_w=1.0)
    )
    start: int = Field(default=6, ge=2)
    stop: int = Field(default=24, ge=2)

    @model_validator(mode="after")
    def _ordered(self) -> "EnvelopeConfig":
        if self.stop < self.start:
            raise ValueError("stop must not be below start")
        return self


class SlopeConfig(EnvelopeConfig):
    """Fit exponents to an envelope series and compare with the coded ones."""

    kind: Literal["slope"] = "slope"  # type: ignore[assignment]
    power_tol: float = Field(default=0.05, gt=0)
    log_power_tol: float = Field(default=0.5, gt=0)


ExperimentConfig = Annotated[
    Union[
        EntropyOracleConfig,
        SchuttBandConfig,
        KuhnConfig,
        TreeGenConfig,
        PartitionFuzzConfig,
        SumopNormConfig,
        CjBandConfig,
        EnvelopeConfig,
        SlopeConfig,
    ],
    Field(discriminator="kind"),
]

_ADAPTER: TypeAdapter[ExperimentConfig] = TypeAdapter(ExperimentConfig)

EXPERIMENT_KINDS = (
    "entropy-oracle",
    "schutt-band",
    "kuhn",
    "tree-gen",
    "partition-fuzz",
    "sumop-norm",
    "cj-band",
    "envelope",
    "slope",
)


def parse_experiment(data: dict[str, Any] | str | bytes) -> ExperimentConfig:
    """Validate a config dict or JSON text.

    Raises:
        ValidationException: naming the first offending field
    """
    try:
        if isinstance(data, (str, bytes)):
            return _ADAPTER.validate_json(data)
        return _ADAPTER.validate_python(data)
    except PydanticValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "config"
        raise ValidationException(
            f"Invalid experiment config at {field}: {first['msg']}", field=field
        ) from e
