"""Entropy-number calculus on certified bound sequences."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from entropylab.app.core.exceptions import EmptyBlockListException, ValidationException
from entropylab.app.services.entropy.models import BoundKind, BoundSequence, EntropyInterval


def _require_upper(*sequences: BoundSequence) -> None:
    for seq in sequences:
        if seq.kind is not BoundKind.UPPER:
            raise ValidationException("Calculus rules need upper bound sequences", field="kind")


def _split_table(a: BoundSequence, b: BoundSequence) -> np.ndarray:
    """Index grid m = k + l - 1 (0-based: i + j) for every split."""
    return np.add.outer(np.arange(len(a)), np.arange(len(b)))


def bound_sum(a: BoundSequence, b: BoundSequence) -> BoundSequence:
    """Upper bounds for S + T from e_{k+l-1}(S+T) <= e_k(S) + e_l(T).

    The result has length len(a) + len(b) - 1.
    """
    _require_upper(a, b)
    index = _split_table(a, b)
    totals = np.add.outer(a.as_array(), b.as_array())
    out = np.full(len(a) + len(b) - 1, np.inf)
    np.minimum.at(out, index.ravel(), totals.ravel())
    return BoundSequence(tuple(out), BoundKind.UPPER)


def bound_compose(
    a: BoundSequence,
    b: BoundSequence,
    normS: float,
    normT: float,
) -> BoundSequence:
    """Upper bounds for S∘T.

    Combines e_m(ST) <= ||S|| e_m(T), e_m(ST) <= ||T|| e_m(S) and
    e_{k+l-1}(ST) <= e_k(S) e_l(T); each term is used where its index exists.
    """
    _require_upper(a, b)
    if normS < 0 or normT < 0:
        raise ValidationException("Operator norms must be nonnegative", field="norm")

    out = np.full(len(a) + len(b) - 1, np.inf)
    np.minimum.at(
        out,
        _split_table(a, b).ravel(),
        np.multiply.outer(a.as_array(), b.as_array()).ravel(),
    )
    out[: len(b)] = np.minimum(out[: len(b)], normS * b.as_array())
    out[: len(a)] = np.minimum(out[: len(a)], normT * a.as_array())
    return BoundSequence(tuple(out), BoundKind.UPPER)


def family_bound(
    per_member: float,
    family_size: int,
    approx_error: float,
    n: int = 1,
) -> tuple[int, float]:
    """Index and bound for an operator approximated by a finite family.

    If every member satisfies e_n <= per_member and the family approximates
    the operator within approx_error, then
    e_{n + floor(log2 |family|) + 1} <= per_member + approx_error.
    """
    if family_size < 1:
        raise ValidationException("Family needs at least one member", field="family_size")
    if approx_error < 0 or per_member < 0:
        raise ValidationException("Bounds must be nonnegative", field="approx_error")
    # bit_length() == floor(log2(size)) + 1 for size >= 1
    return n + family_size.bit_length(), per_member + approx_error


def block_lower_bound(
    block_norms: Sequence[float],
    oracle_idm: EntropyInterval,
    n: int | None = None,
) -> float:
    """Certified lower bound M * e_n(I_m) for m disjoint blocks of norm >= M.

    ``oracle_idm`` brackets e_n of the identity on l_p^m -> l_q^m; when ``n``
    is given it must match the bracket's index and not exceed m.
    """
    if len(block_norms) == 0:
        raise EmptyBlockListException()
    norms = np.asarray(block_norms, dtype=float)
    if np.any(norms < 0):
        raise ValidationException("Block norms must be nonnegative", field="block_norms")
    if n is not None and (n != oracle_idm.k or n > norms.size):
        raise ValidationException(
            f"Index n={n} must equal the oracle index {oracle_idm.k} and be <= {norms.size}",
            field="n",
        )
    return float(norms.min()) * oracle_idm.lower
