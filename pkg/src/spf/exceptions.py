"""Exception and warning types raised across the package."""


class SingularSystemError(ArithmeticError):
    """Least-squares column submatrix is numerically rank deficient."""

    def __init__(self, support, message=None):
        self.support = tuple(int(j) for j in support)
        if message is None:
            message = f"rank-deficient column submatrix on support {self.support}"
        super().__init__(message)


class DegenerateInputError(ValueError):
    """Input is zero (or otherwise degenerate) where a nonzero one is required."""


class DomainError(ValueError):
    """Closed-form expression evaluated outside the region where it is defined."""


class ConvergenceWarning(UserWarning):
    """An iterative routine hit its iteration cap before meeting its tolerance."""
