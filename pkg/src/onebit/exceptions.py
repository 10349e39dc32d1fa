"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or infeasible parameter/configuration values."""


class ConvergenceError(RuntimeError):
    """Iterative solver exhausted its iteration budget.

    Carries the solver diagnostics so callers can inspect the residual
    history of the failed run.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
