class InputError(ValueError):
    """Raised when an operation rejects its arguments."""


class ConfigError(ValueError):
    """Raised for invalid configuration values or malformed config files."""
