"""Custom exceptions for Entropy Lab."""

from typing import Any


class EntropyLabException(Exception):
    """Base exception for Entropy Lab."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        error_code: str = "INTERNAL_ERROR",
        suggestion: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code
        self.suggestion = suggestion
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> dict[str, Any]:
        """Serialize for JSON reports."""
        return {
            "error_code": self.error_code,
            "message": self.message,
            "suggestion": self.suggestion,
            "details": self.details,
        }


class ValidationException(EntropyLabException):
    """Exception for malformed input or configuration."""

    def __init__(
        self,
        message: str,
        field: str | None = None,
    ) -> None:
        super().__init__(
            message=message,
            exit_code=1,
            error_code="VALIDATION_ERROR",
            suggestion="Please check your input and try again.",
            details={"field": field} if field else None,
        )
        self.field = field


class ScaleException(EntropyLabException):
    """Exception for inputs beyond the brute-force scale guards."""

    def __init__(
        self,
        message: str,
        limit: str,
        suggestion: str | None = None,
    ) -> None:
        super().__init__(
            message=message,
            error_code="SCALE_ERROR",
            suggestion=suggestion
            or f"Reduce the problem size so that {limit} holds.",
            details={"limit": limit},
        )
        self.limit = limit


class DivergenceException(EntropyLabException):
    """Exception for series that do not converge."""

    def __init__(self, message: str, exponent: float | None = None) -> None:
        super().__init__(
            message=message,
            error_code="DIVERGENT_SERIES",
            suggestion="Use a faster decaying sequence or a smaller exponent ratio.",
            details={"exponent": exponent} if exponent is not None else None,
        )
        self.exponent = exponent


class UnsupportedRegimeException(EntropyLabException):
    """Exception for parameter sets outside every supported branch."""

    def __init__(
        self,
        message: str,
        regime: str | None = None,
        suggestion: str | None = None,
    ) -> None:
        super().__init__(
            message=message,
            error_code="UNSUPPORTED_REGIME",
            suggestion=suggestion
            or "Move the parameters away from the excluded boundary or pick another branch.",
            details={"regime": regime} if regime else None,
        )
        self.regime = regime


class DomainException(EntropyLabException):
    """Exception for arguments outside a function's domain."""

    def __init__(self, message: str, argument: str, value: Any) -> None:
        super().__init__(
            message=message,
            error_code="DOMAIN_ERROR",
            suggestion=f"Pass a value of '{argument}' inside the documented domain.",
            details={"argument": argument, "value": value},
        )
        self.argument = argument
        self.value = value


class InfeasibleProfileException(EntropyLabException):
    """Exception for h-set profiles that cannot drive a tree construction."""

    def __init__(self, message: str, suggestion: str | None = None) -> None:
        super().__init__(
            message=message,
            error_code="INFEASIBLE_PROFILE",
            suggestion=suggestion
            or "Check that h is nondecreasing and the requested depth is small enough.",
        )


class UnknownVertexException(EntropyLabException):
    """Exception for vertex ids not present in a tree."""

    def __init__(self, vertex: int, size: int) -> None:
        super().__init__(
            message=f"Vertex {vertex} is not in a tree with {size} vertices",
            error_code="UNKNOWN_VERTEX",
            suggestion=f"Vertex ids are dense integers 0..{size - 1}.",
            details={"vertex": vertex, "size": size},
        )
        self.vertex = vertex


class ZeroWeightException(EntropyLabException):
    """Exception for vertex weightings with zero total mass."""

    def __init__(self) -> None:
        super().__init__(
            message="Total vertex weight must be positive",
            error_code="ZERO_WEIGHT",
            suggestion="Give at least one vertex a positive weight.",
        )


class NoIncomparableSetException(EntropyLabException):
    """Exception raised when no level holds enough pairwise incomparable vertices."""

    def __init__(self, requested: int, widest_level: int) -> None:
        super().__init__(
            message=(
                f"No level holds {requested} vertices; the widest level has "
                f"{widest_level}"
            ),
            error_code="NO_INCOMPARABLE_SET",
            suggestion="Request fewer blocks or use a bushier tree.",
            details={"requested": requested, "widest_level": widest_level},
        )


class DegenerateGridException(EntropyLabException):
    """Exception for rate series too short or too narrow to fit."""

    def __init__(self, message: str) -> None:
        super().__init__(
            message=message,
            error_code="DEGENERATE_GRID",
            suggestion="Use at least 6 points spanning at least 3 octaves.",
        )


class EmptyBlockListException(EntropyLabException):
    """Exception for block lower bounds requested without blocks."""

    def __init__(self) -> None:
        super().__init__(
            message="Block lower bound needs at least one block norm",
            error_code="EMPTY_BLOCKS",
            suggestion="Pass the norms of the disjoint blocks.",
        )


class ConvergenceException(EntropyLabException):
    """Exception for iterative solvers that miss their tolerance."""

    def __init__(self, message: str, residual: float, tolerance: float) -> None:
        super().__init__(
            message=message,
            error_code="NOT_CONVERGED",
            suggestion="Loosen the tolerance in config.yaml or move the argument away from the branch start.",
            details={"residual": residual, "tolerance": tolerance},
        )
        self.residual = residual
        self.tolerance = tolerance
