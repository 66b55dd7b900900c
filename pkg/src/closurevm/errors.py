"""Exception hierarchy shared by the reader, evaluator and machine."""

from __future__ import annotations


class LispError(Exception):
    """Base class for every error the language reports to the user."""

    kind = "error"

    def __init__(self, message: str, position: tuple[int, int] | None = None):
        super().__init__(message)
        self.message = message
        self.position = position

    def __str__(self) -> str:
        if self.position is None:
            return f"{self.kind}: {self.message}"
        line, col = self.position
        return f"{self.kind} at {line}:{col}: {self.message}"


class ReaderError(LispError):
    kind = "read-error"


class UnboundVariable(LispError):
    kind = "unbound-variable"


class UndefinedFunction(LispError):
    kind = "undefined-function"


class NotAFunction(LispError):
    kind = "not-a-function"


class ArityMismatch(LispError):
    kind = "arity-mismatch"


class LispTypeError(LispError):
    kind = "type-error"


class MalformedForm(LispError):
    kind = "malformed-form"


class StackOverflow(LispError):
    kind = "stack-overflow"
