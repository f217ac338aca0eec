"""Exception types shared across the package."""


class TwoPhotonError(Exception):
    """Base class for package errors."""


class ParameterError(TwoPhotonError, ValueError):
    """A parameter is unbound or bound to an invalid value."""


class ParseError(TwoPhotonError, ValueError):
    """Malformed operator text or configuration."""


class ModelError(TwoPhotonError, ValueError):
    """Invalid potential model parameters."""


class NotRepresentableError(TwoPhotonError):
    """The potential has no exact symbolic form; use the numeric oracle instead."""


class DomainError(TwoPhotonError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(TwoPhotonError, ArithmeticError):
    """Evaluation exactly at a zero-width resonance pole."""


class ResonanceError(TwoPhotonError, ArithmeticError):
    """An energy denominator falls inside the guard band."""

    def __init__(self, message: str, state=None, energy=None):
        super().__init__(message)
        self.state = state
        self.energy = energy


class ConfigurationError(TwoPhotonError, ValueError):
    """Numerical configuration violates an accuracy invariant."""


class GridMismatchError(TwoPhotonError, ValueError):
    """Wavefunctions live on different grids."""


class FitError(TwoPhotonError, ArithmeticError):
    """Least-squares fit is degenerate."""


class ValidationError(TwoPhotonError, ValueError):
    """Invalid user configuration; message names the offending field."""
