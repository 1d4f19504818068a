"""Library configuration using Pydantic Settings.

Defaults come from ``config/config.yaml`` and constructor arguments only.
Environment variables are not read.
"""

from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)

CONFIG_PATH = Path(__file__).resolve().parents[2] / "config" / "config.yaml"


class Settings(BaseSettings):
    """Library settings loaded from the YAML configuration file."""

    model_config = SettingsConfigDict(
        yaml_file=CONFIG_PATH,
        yaml_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # ==========================================================================
    # Application Settings
    # ==========================================================================
    debug: bool = Field(default=False, description="Debug mode (console logs)")
    log_level: str = Field(default="WARNING", description="Log level")

    # ==========================================================================
    # Entropy Oracle
    # ==========================================================================
    oracle_max_dim: int = Field(default=4, description="Largest source dimension")
    oracle_max_k: int = Field(default=12, description="Largest entropy index")
    oracle_max_mesh: float = Field(default=0.5, description="Coarsest net mesh")
    oracle_packing_restarts: int = Field(
        default=32, description="Farthest-point traversals per oracle call"
    )
    oracle_refine_rounds: int = Field(
        default=100, description="Minimax refinement rounds for covering centers"
    )
    oracle_max_net_points: int = Field(
        default=2_000_000, description="Guard on raw grid size of a ball net"
    )
    membership_tol: float = Field(
        default=1e-12, description="Ball membership tolerance for net filtering"
    )
    cube_vertex_max_dim: int = Field(
        default=12, description="Largest dimension for exact cube-vertex norms"
    )

    # ==========================================================================
    # Band Thresholds
    # ==========================================================================
    schutt_band: float = Field(default=16.0, description="Schütt ratio band B")
    cj_band: float = Field(default=32.0, description="C(j) max/min threshold")
    slowly_varying_cap: float = Field(
        default=100.0, description="Largest accepted slowly-varying constant"
    )

    # ==========================================================================
    # Summation Operators
    # ==========================================================================
    norm_restarts: int = Field(default=64, description="Norm estimate multistarts")
    norm_ascent_steps: int = Field(
        default=500, description="Ascent iterations per multistart"
    )
    power_tol: float = Field(default=1e-12, description="Power iteration tolerance")
    power_max_iter: int = Field(default=20_000, description="Power iteration cap")
    matrix_max_vertices: int = Field(
        default=4096, description="Dense matrix size guard"
    )
    basis_start_max_vertices: int = Field(
        default=256, description="Largest tree seeded with basis-vector starts"
    )

    # ==========================================================================
    # Trees
    # ==========================================================================
    t_floor: float = Field(default=0.25, description="Closed-form range of h")
    max_tree_depth: int = Field(default=30, description="Deepest generated tree")
    max_tree_vertices: int = Field(
        default=10_000_000, description="Vertex-count guard for generated trees"
    )
    hset_sample: int = Field(
        default=20_000, description="Pairs checked by h-set verification"
    )

    # ==========================================================================
    # Asymptotics
    # ==========================================================================
    envelope_n_min: int = Field(default=4, description="Smallest envelope index")
    growth_rtol: float = Field(
        default=1e-10, description="Relative residual for growth inversion"
    )

    # ==========================================================================
    # Acceptance Campaign Sizes
    # ==========================================================================
    acceptance_fuzz_trees: int = Field(default=500, description="Partition fuzz trees")
    acceptance_fuzz_max_vertices: int = Field(
        default=10_000, description="Largest fuzz tree"
    )
    acceptance_sumop_trees: int = Field(
        default=100, description="Random weighted trees for norm cross-checks"
    )
    acceptance_sumop_max_vertices: int = Field(
        default=64, description="Largest weighted tree for norm cross-checks"
    )
    acceptance_operator_pairs: int = Field(
        default=50, description="Random operator pairs for the bound calculus"
    )
    acceptance_scale_operators: int = Field(
        default=20, description="Random operators for scale equivariance"
    )
    acceptance_block_trees: int = Field(
        default=20, description="Small trees for block lower bounds"
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """Read constructor arguments first, then the YAML file; nothing else."""
        return (init_settings, YamlConfigSettingsSource(settings_cls))

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v = v.upper()
        if v not in valid_levels:
            raise ValueError(f"Invalid log level: {v}. Must be one of {valid_levels}")
        return v


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
