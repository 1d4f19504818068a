"""Closed-form envelopes, growth inversion and rate fitting."""

from entropylab.app.services.asymptotics.fitting import slope_fit
from entropylab.app.services.asymptotics.growth import invert_growth, slowly_varying_check
from entropylab.app.services.asymptotics.models import (
    EnvelopeParams,
    EnvelopeSide,
    EnvelopeValue,
    GrowthSolution,
    LogPowerProfile,
    RateSeries,
    SlopeFit,
    SlowlyVaryingReport,
    log_power,
)
from entropylab.app.services.asymptotics.theorems import (
    envelope,
    sobolev_envelope,
    tree_envelope,
)

__all__ = [
    "EnvelopeParams",
    "EnvelopeSide",
    "EnvelopeValue",
    "GrowthSolution",
    "LogPowerProfile",
    "RateSeries",
    "SlopeFit",
    "SlowlyVaryingReport",
    "envelope",
    "invert_growth",
    "log_power",
    "slope_fit",
    "slowly_varying_check",
    "sobolev_envelope",
    "tree_envelope",
]
