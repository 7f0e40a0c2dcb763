"""mixup-optimal exception hierarchy.

All exceptions inherit from MixupError so callers can catch the broadest
class they care about:

    try:
        probs = h_epsilon(ds, dist, x, 0.1)
    except OracleDomainError:
        ...
    except NumericalError:
        ...
    except MixupError:
        # catch-all for any package error

Non-fatal conditions are reported as warnings deriving from MixupWarning.
"""

from __future__ import annotations

from typing import Any


class MixupError(Exception):
    """Base class for every exception raised by this package."""

    def __init__(self, message: str = "", *, details: Any = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def __repr__(self) -> str:  # pragma: no cover
        return f"{self.__class__.__name__}(message={self.message!r})"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


class ConfigError(MixupError):
    """An experiment configuration field is unknown or has a bad value."""

    def __init__(
        self, message: str = "", *, field: str | None = None, details: Any = None
    ) -> None:
        super().__init__(message, details=details)
        self.field = field


# ---------------------------------------------------------------------------
# Caller contract errors
# ---------------------------------------------------------------------------


class ContractError(MixupError, ValueError):
    """A precondition of the called operation does not hold."""


class InvalidDistributionError(ContractError):
    """The mixing distribution parameters are invalid (α ≤ 0, bad table)."""


class AsymmetricDistributionError(ContractError):
    """The operation requires a mixing distribution symmetric about ½."""


class DimensionMismatchError(ContractError):
    """Vectors or datasets do not share a dimension."""


class SizeError(ContractError):
    """The input is outside the size range the operation supports."""


# ---------------------------------------------------------------------------
# Dataset errors
# ---------------------------------------------------------------------------


class DatasetError(MixupError, ValueError):
    """A dataset violates a construction invariant (e.g. an empty class)."""


class DatasetParseError(DatasetError):
    """A dataset CSV file could not be parsed; ``line`` is 1-based."""

    def __init__(
        self,
        message: str = "",
        *,
        path: str | None = None,
        line: int | None = None,
        details: Any = None,
    ) -> None:
        super().__init__(message, details=details)
        self.path = path
        self.line = line


class IdxFormatError(DatasetError):
    """An IDX file has a bad magic number, is truncated, or has wrong counts."""

    def __init__(
        self, message: str = "", *, path: str | None = None, details: Any = None
    ) -> None:
        super().__init__(message, details=details)
        self.path = path


# ---------------------------------------------------------------------------
# Oracle errors
# ---------------------------------------------------------------------------


class OracleDomainError(MixupError):
    """The probe point receives no mixture mass at the requested ε."""


# ---------------------------------------------------------------------------
# Recovery errors
# ---------------------------------------------------------------------------


class RecoveryError(MixupError):
    """Midpoint recovery could not be carried out."""


class UnderdeterminedError(RecoveryError):
    """Some pair midpoints are missing, so the points are not determined."""

    def __init__(
        self,
        message: str = "",
        *,
        missing: list[tuple[int, int]] | None = None,
        details: Any = None,
    ) -> None:
        super().__init__(message, details=details)
        self.missing = missing or []


# ---------------------------------------------------------------------------
# Numerical failures
# ---------------------------------------------------------------------------


class NumericalError(MixupError):
    """A numerical procedure failed to produce a trustworthy result."""


class InconsistentMidpointsError(NumericalError, RecoveryError):
    """The midpoint system has no exact solution; ``residual`` is its ∞-norm."""

    def __init__(
        self, message: str = "", *, residual: float = float("nan"), details: Any = None
    ) -> None:
        super().__init__(message, details=details)
        self.residual = residual


class SingularGramError(NumericalError):
    """The Gram matrix of the data is singular (points not independent)."""

    def __init__(
        self, message: str = "", *, rank: int | None = None, details: Any = None
    ) -> None:
        super().__init__(message, details=details)
        self.rank = rank


class ConvergenceError(NumericalError):
    """An iterative solver stopped at ``max_iters`` above its tolerance."""

    def __init__(
        self,
        message: str = "",
        *,
        grad_norm: float = float("nan"),
        iterations: int = 0,
        details: Any = None,
    ) -> None:
        super().__init__(message, details=details)
        self.grad_norm = grad_norm
        self.iterations = iterations


class DegenerateObjectiveError(NumericalError):
    """The objective is flat, so its minimiser is not unique."""


# ---------------------------------------------------------------------------
# Warnings
# ---------------------------------------------------------------------------


class MixupWarning(UserWarning):
    """Base class for warnings emitted by this package."""


class UnsupportedDistributionWarning(MixupWarning):
    """Beta(α, α) with α < 0.5: the density is outside the validated range."""


class NoEligibleReferenceWarning(MixupWarning):
    """No reference point belongs to a class other than the mixed pair."""
