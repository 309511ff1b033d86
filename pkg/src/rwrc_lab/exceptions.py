"""Custom exceptions for rwrc-lab computations.

All exceptions inherit from LabError so callers (and the CLI) can handle
every failure uniformly. Each exception carries a hint aimed at the person
running the experiment.
"""

from __future__ import annotations

from typing import Any, Optional


class LabError(Exception):
    """Base exception for all rwrc-lab errors.

    Attributes:
        message: Human-readable error message.
        hint: Optional hint on how to fix the inputs.
        exit_code: Suggested exit code for the CLI.
    """

    exit_code: int = 1

    def __init__(
        self,
        message: str,
        hint: Optional[str] = None,
        exit_code: Optional[int] = None,
    ) -> None:
        self.message = message
        self.hint = hint
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the exception message with optional hint."""
        if self.hint:
            return f"{self.message}\n\nHint: {self.hint}"
        return self.message


class DegenerateBoxError(LabError):
    """The requested box contains no lattice point.

    This typically occurs when:
    - alpha is too small for the domain G (e.g. alpha=0.5 on (0, 1))
    - G is thinner than one lattice spacing along some axis
    """

    def __init__(
        self,
        message: str = "Degenerate box: alpha*G contains no lattice point",
        hint: Optional[str] = None,
    ) -> None:
        if hint is None:
            hint = "Increase alpha or widen G so that every axis contains an integer."
        super().__init__(message=message, hint=hint)


class SiteNotInBoxError(LabError):
    """A site was used that does not belong to the box."""

    def __init__(self, site: Any) -> None:
        super().__init__(
            message=f"Site {tuple(site)} is not in the box",
            hint="Use lattice.build_box(...).sites to list valid sites.",
        )


class DomainError(LabError):
    """A precondition on the inputs of an operation was violated."""


class ConvergenceError(LabError):
    """An iterative solver did not reach its tolerance.

    Attributes:
        best: Best iterate found (usually a SpectralResult or a vector).
        residual: Residual norm of the best iterate.
    """

    def __init__(
        self,
        message: str,
        best: Any = None,
        residual: Optional[float] = None,
        hint: Optional[str] = None,
    ) -> None:
        self.best = best
        self.residual = residual
        if hint is None:
            hint = "Raise max_iter or loosen tol; the best iterate is attached to the error."
        super().__init__(message=message, hint=hint)


class RegimeMismatchError(LabError):
    """A predictor was called with a variational value from the wrong regime."""


class InsufficientDataError(LabError):
    """Too few sizes or a degenerate grid for a fit."""
