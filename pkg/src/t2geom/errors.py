"""Exception hierarchy shared by every module."""


class T2GeomError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(T2GeomError, ValueError):
    """A Lagrangian or scalar field was evaluated outside its domain."""


class ParseError(T2GeomError, ValueError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class VariableIndexError(ParseError, IndexError):
    """A variable index is outside 1..n."""


class SingularJacobian(T2GeomError, ArithmeticError):
    def __init__(self, message, det=None):
        self.det = det
        super().__init__(message)


class DegenerateLagrangian(T2GeomError, ArithmeticError):
    """The y2-Hessian of the Lagrangian is (numerically) singular."""

    def __init__(self, message, rcond=None):
        self.rcond = rcond
        super().__init__(message)


class SingularMetric(T2GeomError, ArithmeticError):
    pass


class StepError(T2GeomError, RuntimeError):
    pass


class ConfigError(T2GeomError, ValueError):
    pass
