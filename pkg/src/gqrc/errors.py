"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A parameter or configuration value is outside its allowed domain."""


class NumericalError(RuntimeError):
    """A numerical postcondition failed (broken inputs or lost precision)."""
