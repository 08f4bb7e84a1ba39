"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """Raised when a configuration file or parameter set is invalid."""


class DataFormatError(ValueError):
    """Raised when an input dataset violates the published schema."""
