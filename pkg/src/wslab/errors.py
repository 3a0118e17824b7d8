class ValidationError(ValueError):
    """Input violates a documented precondition or schema."""


class ConvergenceError(ArithmeticError):
    """An iterative method ran out of iterations.

    ``best`` carries the best estimate reached so the caller can still
    report it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoScalablePairs(ValidationError):
    """Every index is already good; the table is constant in each direction."""
