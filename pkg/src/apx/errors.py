"""Exception types shared across the package."""


class ApxError(Exception):
    """Base class for package errors."""


class DivergedError(ApxError):
    """Adaptive integration drove the step size to zero (stiff blow-up)."""

    def __init__(self, message, last_t):
        super().__init__(message)
        self.last_t = last_t


class BracketError(ApxError):
    """Root bracket does not contain a sign change."""


class ResonanceError(ApxError):
    """Homogeneous solution satisfies both boundary conditions (W ~ 0)."""


class UnsolvableError(ApxError):
    """Forcing violates the solvability (orthogonality) condition."""


class NoSolutionError(ApxError):
    """Expansion coefficient divides by a vanishing eigenvalue gap."""


class BlowUpError(ApxError):
    """Field simulation produced non-finite values."""

    def __init__(self, message, t):
        super().__init__(message)
        self.t = t


class TurningPointError(ApxError):
    """Phase-integrand coefficient is non-positive on the evaluation set."""


class UnsupportedLayerError(ApxError):
    """Layer-location logic only handles sign-definite b or one simple zero."""


class UnknownExperimentError(ApxError):
    """Experiment name not present in the registry."""


class BadParameterError(ApxError):
    """Unknown or malformed experiment parameter."""
