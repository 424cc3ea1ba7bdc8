"""Exception hierarchy shared by the treedyn modules."""


class TreeDynError(Exception):
    """Base class for every error raised by treedyn."""


class ValidationError(TreeDynError):
    """A tree or map violates a structural invariant (cycle, discontinuity, ...)."""


class ParseError(TreeDynError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class DegeneratePoint(TreeDynError):
    """An arc was requested between a point and itself."""


class EmptySubtree(TreeDynError):
    pass


class BudgetExceeded(TreeDynError):
    """Composition would produce more pieces than the configured budget."""

    def __init__(self, pieces: int, budget: int):
        self.pieces = pieces
        self.budget = budget
        super().__init__(f"piece budget exceeded: {pieces} > {budget}")


class PreconditionViolated(TreeDynError):
    pass


class InternalError(TreeDynError):
    """A solver produced a result that contradicts a theorem it relies on."""


class InconsistencyError(InternalError):
    """Two certified verdicts contradict the equivalences between criteria."""


class CoreUncertified(TreeDynError):
    """The eventual image is only known as an enclosure."""


class SolverFailure(TreeDynError):
    pass


class UndecidedAvoidance(TreeDynError):
    pass


class UnknownEntry(TreeDynError):
    pass


class BadParams(TreeDynError):
    pass
