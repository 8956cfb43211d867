"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class DataError(ValueError):
    """Malformed or out-of-support dataset content."""


class NumericalError(RuntimeError):
    """A numerical step failed (singular matrix, failed factorization, divergence)."""
