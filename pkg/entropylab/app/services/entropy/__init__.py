"""Entropy numbers: brute-force oracle, closed-form envelopes and bound calculus."""

from entropylab.app.services.entropy.calculus import (
    block_lower_bound,
    bound_compose,
    bound_sum,
    family_bound,
)
from entropylab.app.services.entropy.envelopes import (
    check_doubling,
    kuhn_exponent,
    kuhn_omega,
    schutt_envelope,
    tail_lower_bound,
)
from entropylab.app.services.entropy.models import (
    BoundKind,
    BoundSequence,
    CallableSequence,
    EntropyInterval,
    FiniteSequence,
    GeometricSequence,
    OperatorMatrix,
    OracleMethod,
    PowerLawSequence,
    SequenceProfile,
    TailLowerBound,
)
from entropylab.app.services.entropy.oracle import (
    calculus_margins,
    entropy_oracle,
    entropy_oracle_coarsened,
    entropy_profile,
    norm_upper_bound,
)

__all__ = [
    "BoundKind",
    "BoundSequence",
    "CallableSequence",
    "EntropyInterval",
    "FiniteSequence",
    "GeometricSequence",
    "OperatorMatrix",
    "OracleMethod",
    "PowerLawSequence",
    "SequenceProfile",
    "TailLowerBound",
    "block_lower_bound",
    "bound_compose",
    "bound_sum",
    "calculus_margins",
    "check_doubling",
    "entropy_oracle",
    "entropy_oracle_coarsened",
    "entropy_profile",
    "family_bound",
    "kuhn_exponent",
    "kuhn_omega",
    "norm_upper_bound",
    "schutt_envelope",
    "tail_lower_bound",
]
