"""Exception types raised across the package."""


class PldiskError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(PldiskError, ValueError):
    """Model parameters outside the positive/finite domain."""


class SingularLineError(PldiskError, ValueError):
    """Evaluation or orbit hits the degeneracy line u = -D/(2*alpha)."""


class ChartDomainError(PldiskError, ValueError):
    """Point outside the half-plane a directional chart covers."""


class InfinityPointError(PldiskError, ValueError):
    """Chart point sits on the sphere at infinity (lambda1 = 0)."""


class InvalidBranchError(PldiskError, ValueError):
    """Requested manifold branch does not match the equilibrium's spectrum."""


class NonPeriodicError(PldiskError, RuntimeError):
    """Period detection aborted by an event other than the section return."""


class StepLimitError(PldiskError, RuntimeError):
    """Integrator exceeded its step budget or underflowed."""


class InsufficientWindowError(PldiskError, ValueError):
    """Asymptotic fit window holds too few samples."""


class FitDegenerateError(PldiskError, ValueError):
    """Least-squares design matrix is rank-deficient."""


class BracketError(PldiskError, ValueError):
    """Root scan interval does not bracket a sign change."""


class UnclassifiableOrbitError(PldiskError, RuntimeError):
    """Orbit terminal event does not map to an endpoint type."""


class PatternViolationError(PldiskError, RuntimeError):
    """Profile monotonicity contradicts the claimed stationary type."""
