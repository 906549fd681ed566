"""Exception types shared across the package."""


class MaisenseError(Exception):
    """Base class for all package errors."""


class InvalidScenarioError(MaisenseError):
    """Scenario fields violate a precondition (divisibility, strategy/prep mix, ...)."""


class SingularGammaError(MaisenseError):
    """Covariance matrix is singular and the commutator columns leave its range."""


class DegenerateScenarioError(MaisenseError):
    """Moment matrix is singular; the scenario carries no sensitivity."""


class DimensionCapError(MaisenseError):
    """Requested state-vector dimension exceeds the hard cap."""


class EmptyRangeError(MaisenseError):
    """An optimization or sweep range is empty."""
