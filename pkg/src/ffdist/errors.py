class FFDistError(Exception):
    """Base class for all library errors."""


class ConfigError(FFDistError, ValueError):
    pass


class FieldMismatchError(FFDistError, ValueError):
    pass


class EmptySetError(FFDistError, ValueError):
    pass


class BudgetExceededError(FFDistError, RuntimeError):
    """An exhaustive routine was asked to run above its desk-scale budget."""
