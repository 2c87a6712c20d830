"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid dataset, table, or model file content."""


class SolverError(RuntimeError):
    """Numerical failure inside a QP solver (factorization, divergence)."""


class OracleConvergenceError(SolverError):
    """The reference solver ran out of iterations before reaching its tolerance.

    Carries the best iterate found so the caller can inspect how far off it was.
    """

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best
