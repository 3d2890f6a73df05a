"""Exception types raised across the package."""


class UDWError(Exception):
    """Base class for all errors raised by udw_rates."""


class InvalidParameters(UDWError, ValueError):
    """Parameter values outside their admissible range."""


class DomainError(UDWError, ValueError):
    """A square-root argument is negative or a kinematic domain is empty."""


class AsymptoteError(UDWError, ValueError):
    """Closed-form absorption rate is non-real (2E >= M c^2) or undefined."""


class InvalidConvention(UDWError, ValueError):
    """The requested mass convention cannot be used for this quantity."""


class QuadratureFailure(UDWError, ArithmeticError):
    """Adaptive quadrature exhausted its budget without converging."""


class NoSignChange(UDWError, ValueError):
    """Root bracket endpoints do not have opposite signs."""


class RootFindingError(UDWError, ArithmeticError):
    """Residual tolerance could not be met at floating point resolution."""


class UnstableEstimate(UDWError, ArithmeticError):
    """Richardson levels of a finite-difference estimate disagree."""


class GrazingRoot(UDWError, ArithmeticError):
    """Energy-conserving root where the k-derivative of the mismatch vanishes."""


class ResolutionError(UDWError, ValueError):
    """Momentum grid too coarse to resolve the finite-time sinc kernel."""
