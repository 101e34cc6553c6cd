"""Exception types shared across the package."""


class YchanError(Exception):
    """Base class for all domain errors raised by this package."""


class ComplexityGuardError(YchanError):
    """Refused a brute-force scan that would exceed the configured size cap."""


class RegimeError(YchanError):
    """Operation requires more user antennas than relay antennas (N <= M)."""


class ConditioningError(YchanError):
    """Matrix is numerically rank deficient for the requested inversion."""


class DegenerateChannelError(YchanError):
    """Random channel generation kept producing rank-deficient matrices."""


class IntegralityError(YchanError):
    """Operation needs whole-number stream counts but got fractional ones."""


class CapacityError(YchanError):
    """Plan needs more sub-channels than the relay provides."""


class InvariantViolation(YchanError):
    """Internal consistency check failed; indicates a bug, not bad input."""


class PlanConsistencyError(YchanError):
    """Plan references a user/symbol combination that does not exist."""
