class UsageError(ValueError):
    """Invalid arguments or configuration."""


class DivergenceError(ArithmeticError):
    """A gradient or iterate stopped being finite."""


class InsufficientDataError(ValueError):
    """Too few usable points for a rate fit."""


class EigenSolverError(RuntimeError):
    """The dense eigensolver failed to converge."""
