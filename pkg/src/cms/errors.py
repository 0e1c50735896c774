"""Shared exception types."""


class CmsError(Exception):
    """Base class for all library errors."""


class DomainError(CmsError):
    """An argument lies outside the mathematical domain of an operation."""


class ParseError(CmsError):
    """Malformed textual input; carries a position when known."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at {position})")
        self.position = position


class SpaceMismatch(CmsError):
    """Two names or points that must share a space do not."""


class ContractViolation(CmsError):
    """A name, cover or function object failed one of its accuracy contracts."""


class EmptyResult(CmsError):
    """A truncated search produced an empty cover: either the denoted set is
    empty or the truncation depth was insufficient."""


class CapExceeded(CmsError):
    """A bounded search or enumeration hit its configured cap."""
