"""Exception types shared across the package."""


class DistModError(Exception):
    """Base class for all errors raised by distmod."""


class ValidationError(DistModError):
    """An input violates a documented precondition or invariant."""


class ParseError(DistModError):
    """A text input could not be parsed; the message carries the line number."""


class DegenerateFieldError(DistModError):
    """A node's superposed field potential is zero, so the null model is undefined there."""

    def __init__(self, node: int, message: str | None = None):
        self.node = node
        super().__init__(message or f"degenerate field: zero superposed potential at node {node}")
