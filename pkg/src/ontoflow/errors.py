"""Exception hierarchy shared across the runtime."""

from __future__ import annotations


class OntoflowError(Exception):
    """Base class for every error raised by this package."""


# --- BSL front end ---------------------------------------------------------


class LexError(OntoflowError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ParseError(OntoflowError):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected: tuple[str, ...] = ()):
        loc = f" (line {line}, column {column})" if line else ""
        exp = f"; expected one of: {', '.join(expected)}" if expected else ""
        super().__init__(f"{message}{loc}{exp}")
        self.line = line
        self.column = column
        self.expected = expected


class ExprParseError(ParseError):
    pass


class SetDoParseError(ParseError):
    pass


# --- event graph -----------------------------------------------------------


class GraphError(OntoflowError):
    pass


class UnknownCause(GraphError):
    pass


class UnknownBase(GraphError):
    pass


class UnknownEvent(GraphError):
    pass


class UnknownIndividual(GraphError):
    pass


class CorruptDocument(GraphError):
    pass


class DanglingCause(GraphError):
    pass


class NotAPath(GraphError):
    pass


# --- engine ----------------------------------------------------------------


class EngineError(OntoflowError):
    pass


class CoercionError(EngineError):
    """Numeric coercion applied to a non-numeric, non-null value."""


class ActionUnavailable(EngineError):
    pass


class UnknownAction(EngineError):
    pass


class NotEditable(EngineError):
    pass


class UnknownProperty(EngineError):
    pass


class InvalidValue(EngineError):
    """A write was rejected by model validation."""

    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


# --- service ---------------------------------------------------------------


class UnknownView(OntoflowError):
    pass
