"""Exception types shared across the package."""


class DiracflowError(Exception):
    """Base class for all diracflow errors."""


class ValidationError(DiracflowError, ValueError):
    """Invalid parameters or configuration; the message names the violated constraint."""


class DomainError(DiracflowError, ValueError):
    """Mathematically inadmissible argument (non-finite input, t < 0, degenerate phase, ...)."""


class IntegrationError(DiracflowError, RuntimeError):
    """Quadrature did not reach the requested tolerance.

    Carries the best available estimate and the achieved residual so callers
    can decide whether a partial result is usable.
    """

    def __init__(self, message, partial=None, residual=None):
        super().__init__(message)
        self.partial = partial
        self.residual = residual


class NodeError(DiracflowError, ArithmeticError):
    """Wave-function node: density too small to define dependent quantities."""


class InfiniteMomentumError(DiracflowError, ArithmeticError):
    """Bohmian momentum/energy diverge (Bloch polar angle at 0 or pi)."""


class UndefinedSecantError(DiracflowError, ArithmeticError):
    """Bohmian momentum/energy undefined (Bloch azimuth at +-pi/2)."""


class BracketingError(DiracflowError, RuntimeError):
    """Root bracketing failed (no sign change over the search interval)."""
