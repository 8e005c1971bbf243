"""Exception types shared across the package."""


class BlowupLabError(Exception):
    """Base class for all package errors."""


class DomainError(BlowupLabError):
    """Argument outside the admissible domain of an operation."""


class NonIntegrableWeight(BlowupLabError):
    """The boundary-weight primitive fails to converge at the origin."""


class NonConvergentError(BlowupLabError):
    """A limit extrapolation did not settle within tolerance."""


class WrongScaleError(BlowupLabError):
    """Second-order ratio diverges: the probing scale does not match the weight."""


class WrongClassError(BlowupLabError):
    """Second-order weight class and requested correction scale disagree."""


class DivergentIntegralError(BlowupLabError):
    """Improper integral diverges (growth condition violated)."""


class OutOfRangeError(BlowupLabError):
    """Requested abscissa lies outside the invertible range of the profile map."""


class DegenerateExponentError(BlowupLabError):
    """Rate formula degenerates (power equals p - 1)."""


class UnsupportedYKindError(BlowupLabError):
    """Unknown second-order comparison scale."""


class BracketingError(BlowupLabError):
    """Root bracketing failed (target outside the attainable range)."""


class NoConvergenceError(BlowupLabError):
    """Iterative solve exhausted its budget; carries the iteration trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class StepUnderflowError(BlowupLabError):
    """Integrator step size collapsed; carries the last valid radius."""

    def __init__(self, message, last_radius=None):
        super().__init__(message)
        self.last_radius = last_radius


class NotSaturatedError(BlowupLabError):
    """Dirichlet schedule exhausted before the interior converged."""


class WindowTooSmallError(BlowupLabError):
    """Fit window contains too few grid points."""


class DecompositionMismatchError(BlowupLabError):
    """Coefficient does not factor through the declared boundary weight."""


class InsufficientResolutionError(BlowupLabError):
    """Profile not resolved finely enough for a second-order fit."""


class FirstOrderMismatchError(BlowupLabError):
    """First-order constant disagrees with its prediction; refusing to fit further."""


class ConfigError(BlowupLabError):
    """Scenario configuration is malformed."""
