class DomainError(ValueError):
    """A point, rational or argument lies outside the domain of an operation."""


class UsageError(ValueError):
    """Bad request from a caller: unknown builtin, guard exceeded, bad config."""


class ConstructionError(RuntimeError):
    """A builder's self-verification failed.

    The message names the failing condition; ``witness`` holds the offending
    coordinate (or address) when there is one.
    """

    def __init__(self, condition, witness=None):
        self.condition = condition
        self.witness = witness
        msg = condition if witness is None else f"{condition} (witness: {witness})"
        super().__init__(msg)


class InconsistencyError(RuntimeError):
    """Two routes that must agree did not (usually a net that is too coarse)."""
