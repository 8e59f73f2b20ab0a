"""Exception types raised across the package."""


class GasnetError(Exception):
    """Base class for all gasnet errors."""


class InvalidParams(GasnetError, ValueError):
    pass


class SingularAtDC(GasnetError):
    """A has no usable inverse, so the DC gain is undefined (e.g. an integrator)."""


class SingularResolvent(GasnetError):
    """sI - A is singular at the requested frequency."""


class DegenerateJunction(GasnetError):
    pass


class InvalidPressureRatio(GasnetError, ValueError):
    pass


class DegenerateOperatingPoint(GasnetError):
    pass


class NonPhysicalState(GasnetError):
    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (t={t:g} s)")
        self.t = t


class MapDomain(GasnetError):
    pass


class DuplicateId(GasnetError):
    pass


class UnresolvedSignal(GasnetError):
    pass


class AlgebraicLoop(GasnetError):
    pass


class UnknownSignal(GasnetError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class AmbiguousSignal(GasnetError):
    pass


class ConnectionRuleError(GasnetError):
    """A requested connection violates one of the interconnection rules."""

    def __init__(self, message, rule=None):
        super().__init__(message)
        self.rule = rule


class PartitionMismatch(GasnetError):
    pass


class EvaluationFailure(GasnetError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class StepLimit(GasnetError):
    pass


class ParseError(GasnetError):
    pass


class UnknownComponentType(ParseError):
    pass


class UnitError(ParseError):
    pass


class NonSteadyNominal(UserWarning):
    """The linearization point is not an equilibrium of the nonlinear model."""
