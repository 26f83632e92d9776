"""Exception types shared across the package."""


class TwophaseError(Exception):
    """Base class for all package errors."""


class BranchCutViolation(TwophaseError):
    """Square-root argument landed on the branch cut (-inf, 0]."""


class DegenerateSymbol(TwophaseError):
    """A symbol denominator is too close to zero for a stable solve."""


class QuadratureFailure(TwophaseError):
    """Adaptive quadrature did not reach the requested tolerance."""


class GeometryError(TwophaseError):
    """Contour construction failed (inconsistent anchors or intersections)."""


class BoundaryZero(TwophaseError):
    """The function dips below tolerance on a path where it must not vanish."""


class NoConvergence(TwophaseError):
    """Iterative root search stalled; carries the final iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class RootEscapedRegion(TwophaseError):
    """A polished root left its certified containment disk."""


class CalibrationFailure(TwophaseError):
    """No dyadic calibration level satisfied the certificates."""


class SymmetryViolation(TwophaseError):
    """Input expected to be Hermitian in the frequency variable is not."""


class HypothesisViolation(TwophaseError):
    """(p, q) or another parameter lies outside a rate formula's range."""


class NonPolynomialDecay(TwophaseError):
    """Log-linear fit beats log-log fit: the series decays exponentially.

    Carries the fitted exponential rate in ``rate``.
    """

    def __init__(self, message, rate=None):
        super().__init__(message)
        self.rate = rate


class ConfigError(TwophaseError):
    """Run configuration failed validation."""
