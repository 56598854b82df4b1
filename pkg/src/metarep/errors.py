"""Exception types shared across the package.

The CLI maps these onto stable exit codes: invalid input data is exit 2,
violated analysis preconditions exit 3, and an exceeded subset-enumeration
cap exit 4.
"""


class InvalidInputError(ValueError):
    """Malformed or inconsistent input data (bad CSV rows, non-finite values)."""


class PreconditionError(ValueError):
    """An operation was called outside its stated preconditions."""


class EnumerationCapError(PreconditionError):
    """The requested subset enumeration exceeds the configured evaluation cap."""
