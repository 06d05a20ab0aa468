"""Exception hierarchy shared by the solvers and the command line."""


class FairBalanceError(Exception):
    """Base class for all errors raised by this package."""


class GameInputError(FairBalanceError, ValueError):
    """A game or instance description is malformed."""


class MissingGrandCoalition(GameInputError):
    pass


class InvalidCoalition(GameInputError):
    pass


class DuplicateCoalitionKey(GameInputError):
    pass


class DimensionMismatch(FairBalanceError, ValueError):
    pass


class InfeasibleGame(FairBalanceError):
    """The imputation set is empty (sum of singleton worths exceeds v(N))."""


class NumericalBreakdown(FairBalanceError, ArithmeticError):
    """The simplex iteration could not make reliable progress."""


class EstateExceedsClaims(GameInputError):
    pass


class UnsupportedPlayerCount(FairBalanceError, ValueError):
    pass


class MaxStepsExceeded(FairBalanceError):
    """The relaxation did not settle within the step budget.

    The partially recorded trace is attached as ``trace``.
    """

    def __init__(self, message, trace=None, state=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []
        self.state = state
