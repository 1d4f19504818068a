"""Two-weighted summation operators on trees."""

from entropylab.app.services.summation.blocks import entropy_lower_via_blocks
from entropylab.app.services.summation.envelope import cj_band_experiment, cj_envelope
from entropylab.app.services.summation.models import (
    BlockLowerResult,
    CjBandResult,
    CjValue,
    NormEstimate,
    NormMethod,
    NormResult,
    RhoKind,
    SummationOperator,
    WeightProfile,
)
from entropylab.app.services.summation.operator import (
    adjoint,
    apply,
    column_norms,
    norm_estimate,
    norm_exact,
    operator_norm,
    to_matrix,
)

__all__ = [
    "BlockLowerResult",
    "CjBandResult",
    "CjValue",
    "NormEstimate",
    "NormMethod",
    "NormResult",
    "RhoKind",
    "SummationOperator",
    "WeightProfile",
    "adjoint",
    "apply",
    "cj_band_experiment",
    "cj_envelope",
    "column_norms",
    "entropy_lower_via_blocks",
    "norm_estimate",
    "norm_exact",
    "operator_norm",
    "to_matrix",
]
