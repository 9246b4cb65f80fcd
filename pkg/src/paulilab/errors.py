"""Exception types shared across the laboratory modules."""


class PauliLabError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(PauliLabError, ValueError):
    """Raised when inputs violate a documented precondition."""


class InvalidRegimeError(InvalidParameterError):
    """Raised when an operation is called outside its (s, t) regime."""


class ResourceLimitError(PauliLabError, RuntimeError):
    """Raised when a computation would exceed a hard resource budget.

    Carries enough context for the caller to retry with achievable
    settings (e.g. the smallest tolerance that fits the budget).
    """

    def __init__(self, message, *, achievable_tol=None, suggestion=None):
        super().__init__(message)
        self.achievable_tol = achievable_tol
        self.suggestion = suggestion


class ZoneDegenerateError(InvalidParameterError):
    """Raised when the zone decomposition collapses for a too-small r.

    ``minimal_r`` is the smallest argument at which every band and joint
    of the requested partition contains at least one integer.
    """

    def __init__(self, message, *, minimal_r=None):
        super().__init__(message)
        self.minimal_r = minimal_r
