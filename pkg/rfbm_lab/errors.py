from __future__ import annotations

from collections.abc import Sequence


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative scheme does not reach its tolerance."""

    def __init__(self, message: str, history: Sequence[float] = ()) -> None:
        super().__init__(message)
        self.history = tuple(float(value) for value in history)


class ToleranceError(RuntimeError):
    """Raised when adaptive quadrature cannot meet the requested tolerance."""


class DegeneracyError(RuntimeError):
    """Raised when an ODE right-hand side loses its non-degeneracy margin."""


class StepSizeError(RuntimeError):
    """Raised when a fixed-step integrator exceeds its local error budget."""
