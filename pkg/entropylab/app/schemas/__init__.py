"""Pydantic schemas for experiment configuration."""

from entropylab.app.schemas.experiments import (
    EXPERIMENT_KINDS,
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
    WeightProfileSpec,
    parse_experiment,
)

__all__ = [
    "EXPERIMENT_KINDS",
    "CjBandConfig",
    "EntropyOracleConfig",
    "EnvelopeConfig",
    "EnvelopeParamsSpec",
    "ExperimentConfig",
    "HSetProfileSpec",
    "KuhnConfig",
    "PartitionFuzzConfig",
    "SchuttBandConfig",
    "SequenceSpec",
    "SlopeConfig",
    "SumopNormConfig",
    "TreeGenConfig",
    "WeightProfileSpec",
    "parse_experiment",
]
