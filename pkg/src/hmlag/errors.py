"""Exception types shared across the library."""


class HmlagError(Exception):
    """Base class for all library errors."""


class InvalidInput(HmlagError):
    """Malformed or inconsistent input data (dimension mismatch, non-unit
    representative, non-horizontal tangent vector, ...)."""


class DomainError(HmlagError):
    """Radial coordinate outside the validity domain of a metric profile."""


class StateError(HmlagError):
    """Operation requires state (e.g. the motion constant) that is not set."""


class NumericalDomainError(HmlagError):
    """A radicand went negative: the queried momentum exceeds its bound."""


class TurningRegionError(HmlagError):
    """Slope queried beyond a turning point (negative slope radicand)."""


class SingularSlopeError(HmlagError):
    """Slope formula denominator vanished at the queried point."""


class PreconditionError(HmlagError):
    """A documented precondition of the operation does not hold."""


class StiffnessError(HmlagError):
    """Adaptive integration step size underflowed."""


class BracketError(HmlagError):
    """Root bracketing failed (no sign change in the scanned interval)."""


class DegenerateTurningPoint(HmlagError):
    """Turning point is a non-simple zero of the slope radicand."""


class StepError(HmlagError):
    """Finite-difference step too large: Richardson estimates disagree."""


class DegenerateParamError(HmlagError):
    """Immersion parametrization is rank deficient at the queried point."""


class IoError(HmlagError):
    """Export target could not be written."""
