"""Exception hierarchy shared by every QChan module."""

from typing import Any


class QChanError(Exception):
    """Base class for all library errors."""


class InvalidStateError(QChanError, ValueError):
    """A matrix or vector fails the density-matrix / Bloch-vector invariants."""


class DomainError(QChanError, ValueError):
    """An argument lies outside the domain of a formula."""


class InvalidChannelError(QChanError, ValueError):
    """Malformed channel data: bad shapes, non trace-preserving Kraus set, unknown name."""


class WrongTestError(QChanError, ValueError):
    """An inequality test was applied to a map outside the family it characterizes."""


class NoFixedPointError(QChanError):
    """The affine equation t + T w = w has no solution."""


class NotCompletelyPositiveError(QChanError):
    """Contract error: an operation that needs a CP map received one that is not."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report
