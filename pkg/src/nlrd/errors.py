"""Exception types shared across the package.

Exit-code mapping used by the CLI: PreconditionError -> 2 (bad input or
violated hypothesis), NumericalFailure -> 1 (a computation ran but did not
meet its contract).
"""


class NlrdError(Exception):
    """Base class for package errors."""


class PreconditionError(NlrdError):
    """An input, config key, or mathematical hypothesis was violated."""


class NumericalFailure(NlrdError):
    """A solver or internal consistency check failed at runtime."""
