"""Exception hierarchy for the interpreter.

Proof failure is never an exception; these signal malformed input, malformed
programs, or resource problems.
"""

from __future__ import annotations


class LWebError(Exception):
    """Base class for all interpreter errors."""


class ParseError(LWebError):
    def __init__(self, message: str, line: int = 0, column: int = 0, origin: str = "<input>"):
        self.message = message
        self.line = line
        self.column = column
        self.origin = origin
        super().__init__(f"{origin}:{line}:{column}: {message}")


class MacroNotFound(LWebError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no macro definition for /{name}")


class IllTaggedMacro(LWebError):
    def __init__(self, name: str, want: str):
        self.name = name
        self.want = want
        super().__init__(f"macro /{name} cannot be used as a {want} body")


class InstantiationError(LWebError):
    """A builtin received an argument that is not sufficiently instantiated."""


class BuiltinRedefinition(LWebError):
    def __init__(self, name: str, arity: int, origin: str = "<input>"):
        self.name = name
        self.arity = arity
        super().__init__(f"{origin}: clause head {name}/{arity} redefines a builtin")


class UnresolvedLink(LWebError):
    def __init__(self, origin: str):
        self.origin = origin
        super().__init__(f"link goal {origin} reached the engine without a resolver")


class FetchError(LWebError):
    def __init__(self, origin: str, cause: object):
        self.origin = origin
        self.cause = cause
        super().__init__(f"cannot fetch {origin}: {cause}")


class RootMissing(LWebError):
    def __init__(self, origin: str, root: str):
        self.origin = origin
        self.root = root
        super().__init__(f"page {origin} defines no macro /{root}")


class WallClockExceeded(LWebError):
    def __init__(self, cap_ms: int):
        self.cap_ms = cap_ms
        super().__init__(f"wall-clock cap of {cap_ms} ms exceeded")
