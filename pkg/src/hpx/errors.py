"""Exception types shared across the package."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured size budget."""


class DegenerateWarning(UserWarning):
    """The requested quantity is well defined but mathematically degenerate."""
