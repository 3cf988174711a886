"""Exception hierarchy shared across the package."""


class ReversalError(ValueError):
    """Base class for invalid inputs and failed preconditions."""


class DimensionError(ReversalError):
    """Operand shapes or space labels do not line up."""


class NotFullRankError(ReversalError):
    """A density operator required to be full-rank is (numerically) singular."""


class NotUnitaryError(ReversalError):
    pass


class NotSteadyError(ReversalError):
    """The supplied reference state is not a fixed point of the channel."""


class MissingFieldError(ReversalError):
    pass
