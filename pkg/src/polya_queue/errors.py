"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A parameter lies outside its admissible range."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


class ContractError(ValueError):
    """A function was called with arguments that break its preconditions."""


class InsufficientDataError(ValueError):
    """Too few usable points to fit a model."""


class ResourceError(RuntimeError):
    """A computation would exceed its configured budget."""
