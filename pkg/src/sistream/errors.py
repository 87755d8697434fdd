"""Exception types shared across the package."""


class DocumentError(Exception):
    """Problem with an on-disk document. Carries line/field context when known."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field {field!r}")
        if parts:
            message = f"{message} ({', '.join(parts)})"
        super().__init__(message)


class ParseError(DocumentError):
    """Document is malformed and could not be read."""


class ValidationError(DocumentError):
    """Document parsed but violates a model invariant."""


class ContractError(Exception):
    """Inputs that must describe the same video or GOP set disagree."""


class CalibrationError(Exception):
    """No profile parameter can reach the requested power total."""
