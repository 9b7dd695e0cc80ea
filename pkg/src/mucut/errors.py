"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class MucutError(Exception):
    """Base class for library errors."""


class NotAFixpoint(MucutError):
    pass


class ShapeMismatch(MucutError):
    pass


class BadSplit(MucutError):
    pass


class BadPermutation(MucutError):
    pass


class UnknownPosition(MucutError):
    pass


class NotPeriodic(MucutError):
    pass


class NotACutTree(MucutError):
    pass


class PositionsNotInOnePremise(MucutError):
    pass


class NotFireable(MucutError):
    pass


class InvalidInput(MucutError):
    pass


class SimulationFailed(MucutError):
    pass


class NoPreimage(MucutError):
    pass


class ParseError(MucutError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


class SemanticError(MucutError):
    def __init__(self, msg: str, node: str | None = None):
        super().__init__(f"{node}: {msg}" if node else msg)
        self.node = node
