"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class IncompleteScheduleError(ValidationError):
    """Raised when a metric that requires a complete schedule gets a partial one."""


class BudgetExceededError(RuntimeError):
    """Raised when an exact search would exceed its configured budget."""
