"""Package-wide error types, mapped to CLI exit codes."""


class UsageError(Exception):
    """Bad command line or config (exit code 1)."""


class DataError(Exception):
    """Malformed or inconsistent input data (exit code 2)."""


class NumericError(Exception):
    """Non-finite values or numerically undefined results (exit code 3)."""
