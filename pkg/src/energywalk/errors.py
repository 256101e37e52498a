"""Exception hierarchy for the energy-ladder toolkit."""


class EnergyWalkError(Exception):
    """Base class for all errors raised by this package."""


class InvalidState(EnergyWalkError, ValueError):
    """An object violates the invariants of its type."""


class NonPositiveGap(InvalidState):
    pass


class DegenerateWidth(InvalidState):
    pass


class NegativePopulation(InvalidState):
    pass


class InvalidRates(InvalidState):
    pass


class RateShapeMismatch(InvalidRates):
    pass


class DimensionMismatch(EnergyWalkError, ValueError):
    pass


class LengthMismatch(DimensionMismatch):
    pass


class LevelDependentUnsupported(EnergyWalkError, ValueError):
    """Operation is only defined for constant transition rates."""


class NotNormalizable(EnergyWalkError, ValueError):
    pass


class InfeasibleRates(EnergyWalkError, ValueError):
    pass


class UnbiasedRates(EnergyWalkError, ValueError):
    pass


class ZeroUpRate(EnergyWalkError, ValueError):
    pass


class MuOutOfRange(EnergyWalkError, ValueError):
    pass


class EmptyTrajectory(EnergyWalkError, ValueError):
    pass


class InsufficientTail(EnergyWalkError, ValueError):
    pass


class NoConvergence(EnergyWalkError, RuntimeError):
    pass


class NonUniqueFixedPoint(EnergyWalkError, RuntimeError):
    pass


class NoUnitEigenvalue(EnergyWalkError, RuntimeError):
    pass
