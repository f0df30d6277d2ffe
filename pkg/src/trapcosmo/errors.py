"""Exception types raised across the package."""


class TrapCosmoError(Exception):
    """Base class for all package errors."""


class PoleError(TrapCosmoError, ValueError):
    """Argument sits on a pole of the gamma function."""


class ConvergenceError(TrapCosmoError, ArithmeticError):
    """An iterative method hit its iteration cap without converging."""


class DomainError(TrapCosmoError, ValueError):
    """Evaluation requested outside the configured domain."""


class NoSignChangeError(TrapCosmoError, ValueError):
    """Root bracket does not straddle a sign change."""


class QuadratureError(TrapCosmoError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance.

    The best available estimate and its error bound are attached so callers
    can decide whether the result is still usable.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConfigError(TrapCosmoError, ValueError):
    """Invalid experiment configuration.

    ``kind`` is one of ``unknown-key``, ``type-mismatch`` or
    ``invariant-violation``; ``key`` and ``line`` locate the problem.
    """

    def __init__(self, message, kind="invariant-violation", key=None, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.kind = kind
        self.key = key
        self.line = line
