"""Exception hierarchy shared by every module."""


class AdaptmodError(Exception):
    """Base class for all package errors."""


class ParseError(AdaptmodError, ValueError):
    """Malformed input text; ``lineno`` is 1-based, or None if not line-bound."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class DomainError(AdaptmodError, ValueError):
    """Arguments are well-formed but outside the operation's domain."""


class DegenerateWeightsError(DomainError):
    """Total edge weight is zero (or non-positive where positivity is required)."""


class InfeasibleEnhancementError(DomainError):
    """A balanced enhancement cannot be realised for the requested amounts."""

    def __init__(self, message, community=None):
        super().__init__(message)
        self.community = community


class ConvergenceError(AdaptmodError):
    """Training stopped without meeting its gradient tolerance."""


class StageError(AdaptmodError):
    """A pipeline stage failed; ``cause`` is the underlying exception."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
