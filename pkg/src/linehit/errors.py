"""Exception hierarchy shared by all modules."""


class LineHitError(Exception):
    pass


class LawError(LineHitError, ValueError):
    """An increment law violates one of the standing assumptions."""


class BadProbabilities(LawError):
    pass


class NotZeroMean(LawError):
    pass


class NotIrreducible(LawError):
    pass


class DomainError(LineHitError, ValueError):
    pass


class SingularArguments(DomainError):
    pass


class OnSlit(DomainError):
    pass


class QuadratureFailure(LineHitError, ArithmeticError):
    pass


class PeriodicLaw(LineHitError):
    pass


class SingularSystem(LineHitError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class WindowTooSmall(LineHitError):
    pass


class BudgetInfeasible(LineHitError):
    pass


class SeriesNotConverged(LineHitError, ArithmeticError):
    pass


class NotConverged(LineHitError, ArithmeticError):
    pass


class WrongWalk(LineHitError, ValueError):
    pass


class ConfigError(LineHitError, ValueError):
    pass
