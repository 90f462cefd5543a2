"""Exception types shared across the package."""


class SplitServeError(Exception):
    """Base class for all library errors."""


class ProfileShapeError(SplitServeError, ValueError):
    """A profile, distribution, or assignment does not fit together
    (wrong partition count, missing runtime entry, bad fractions)."""


class ConfigKindError(SplitServeError, TypeError):
    """A VM config was used where a serverless config is required, or
    vice versa."""


class InfeasibleError(SplitServeError, RuntimeError):
    """No candidate configuration satisfies the latency objective."""

    def __init__(self, message: str = "No configuration meets SLO."):
        super().__init__(message)


class InputError(SplitServeError, ValueError):
    """A user-supplied file or parameter failed to parse or validate."""
