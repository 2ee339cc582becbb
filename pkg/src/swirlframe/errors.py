"""Exception types raised by the toolkit."""


class SwirlframeError(Exception):
    """Base class for all toolkit errors."""


class DomainError(SwirlframeError, ValueError):
    """An evaluation point or parameter lies outside its admissible domain."""


class NumericError(SwirlframeError, ArithmeticError):
    """A numerical procedure failed to converge or was used beyond its validated range."""


class StagnationError(NumericError):
    """Speed fell below the stagnation floor where a positive speed is required."""


class UnilateralViolation(DomainError):
    """The axial velocity is not strictly positive where a unilateral flow is required."""


class StructuralError(NumericError):
    """The streamline map lost monotonicity (streamlines crossed)."""


class RangeError(DomainError):
    """A lookup value lies outside the range covered by a map."""


class FrameUndefinedError(DomainError):
    """Curvature below the floor: the Frenet frame is undefined."""


class AmbiguityError(DomainError):
    """More than one closest point on the curve within the tube."""


class UncertifiedFieldError(SwirlframeError):
    """The field is not a certified exact Euler solution."""


class ConfigError(SwirlframeError, ValueError):
    """Scenario configuration failed validation."""
