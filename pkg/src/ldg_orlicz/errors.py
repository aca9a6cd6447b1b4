"""Exception hierarchy shared by all modules."""


class LdgError(Exception):
    """Base class for errors raised by ldg_orlicz."""


class DomainError(LdgError, ValueError):
    """An argument lies outside the domain of a function (e.g. t < 0)."""


class SingularityError(LdgError, ArithmeticError):
    """Evaluation at a point where the requested quantity is singular."""


class ConfigurationError(LdgError, ValueError):
    """Invalid mesh, quadrature or solver configuration."""


class UsageError(LdgError, ValueError):
    """An operation was requested on an object it is not defined for."""


class LinearSolverError(LdgError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonConvergenceError(LdgError, RuntimeError):
    """Newton iteration hit max_iter; ``trace`` holds the residual history."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class StagnationError(NonConvergenceError):
    """Line search could not find an acceptable step."""
