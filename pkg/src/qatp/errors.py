"""Exception types shared across the toolkit."""


class QatpError(Exception):
    """Base class for all toolkit errors."""


class ParseError(QatpError):
    """Malformed input text; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class BudgetError(QatpError):
    """A configured size cap (ground instances, Herbrand terms, ...) was exceeded."""


class CapacityError(QatpError):
    """Requested simulation exceeds the configured qubit capacity."""


class VocabularyError(QatpError):
    """Clauses over mismatched vocabularies were combined."""


class DegenerateSystemError(QatpError):
    """Hypothesis system admits no triangular form (zero pivot)."""


class MalformedWordError(QatpError):
    """A decoded resolution word violates the exactly-one-resolved contract."""


class RegisterError(QatpError):
    """Register layout problem: overlap, out of range, or width mismatch."""
