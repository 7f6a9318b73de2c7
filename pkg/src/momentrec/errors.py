"""Exception types shared across the package."""


class UsageError(ValueError):
    """Bad arguments or malformed input (CLI exit code 2)."""


class DomainError(ValueError):
    """Mathematically invalid request or failed verification (CLI exit code 3)."""
