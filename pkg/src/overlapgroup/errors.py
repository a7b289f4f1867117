"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: malformed files, violated preconditions, inconsistent sizes."""


class DimensionError(ValidationError):
    pass


class NumericalError(RuntimeError):
    """An iterative routine failed to reach its tolerance."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
