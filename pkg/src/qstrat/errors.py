"""Exception hierarchy shared by all qstrat modules."""


class QStratError(Exception):
    """Base class for every error raised by qstrat."""


class LabelingError(QStratError, ValueError):
    """System labels are inconsistent (duplicates, unknown names, dim clashes)."""


class NumericContractError(QStratError, ValueError):
    """A numerical precondition (e.g. Hermiticity) does not hold."""


class DomainError(QStratError, ValueError):
    """A parameter lies outside the domain of the requested operation."""


class BuildError(QStratError, ValueError):
    """An optimization problem is structurally inconsistent."""


class SolverStatusError(QStratError, RuntimeError):
    """The solver did not certify an optimal solution.

    The last :class:`~qstrat.solver.SolveReport` is kept on ``report``;
    ``status`` names the failure (a solver status or ``"gap_exceeded"``).
    """

    def __init__(self, message, report=None, status=None):
        super().__init__(message)
        self.report = report
        if status is None:
            status = report.status if report is not None else "numerical_failure"
        self.status = status


class ParseError(QStratError, ValueError):
    """Malformed textual input; ``position`` is the 0-based offending offset."""

    def __init__(self, message, position=0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class RenderError(QStratError, ValueError):
    """Data required for a plot is missing."""
