"""Exception types shared across the package."""


class GalcheckError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GalcheckError):
    """Surface-syntax error, with the offending position and what was expected."""

    def __init__(self, message: str, position: int, expected: str | None = None):
        detail = f"at position {position}: {message}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)
        self.position = position
        self.expected = expected


class SortError(GalcheckError):
    """A term, predicate, or equality does not respect the declared sorts."""


class UnknownIdentifierError(GalcheckError):
    """An identifier is not declared in the signature and not bound."""


class SchemaError(GalcheckError):
    """A file does not conform to its format; carries a JSON-pointer-ish path."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path


class ValidationError(GalcheckError):
    """A structure or game violates its invariants; carries the full report."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class InterpretationError(GalcheckError):
    """A function or predicate interpretation failed or returned a bad value."""


class BindingError(GalcheckError):
    """A valuation does not cover the free variables or assigns bad elements."""
