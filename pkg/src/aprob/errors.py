"""Exception hierarchy shared across the package."""


class AprobError(Exception):
    """Base class for every error raised deliberately by this package."""


class DomainError(AprobError, ValueError):
    """An argument lies outside the operation's domain."""


class StreamContractError(AprobError):
    """A candidate stream broke its ordering or mass contract."""


class InsufficientDepthError(AprobError):
    """Enumeration found no mass for either continuation at the given depth."""

    def __init__(self, x: str, depth: int):
        self.x = x
        self.depth = depth
        super().__init__(
            f"insufficient enumeration depth: no program of length <= {depth} "
            f"produces {x!r} followed by 0 or 1; increase the depth"
        )


class ModelFileError(AprobError):
    """A persisted model document could not be loaded."""
