class ValidationError(ValueError):
    """Bad input: wrong dimension, out-of-range parameter, malformed data."""


class InvariantError(AssertionError):
    """An internal numerical or combinatorial invariant failed to hold."""
