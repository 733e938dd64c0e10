"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an operation receives values outside its input domain."""


class ConfigError(ValueError):
    """Raised when a configuration or parameter set violates an invariant."""
