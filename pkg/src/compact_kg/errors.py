"""Exception types raised by the solvers and the study harness."""


class KGError(Exception):
    """Base class for all package errors."""


class GridMismatchError(KGError, ValueError):
    """Two grid functions live on different grids."""


class SymmetryError(KGError, ValueError):
    """Spectral coefficients are not Hermitian, so they do not describe a real signal."""


class ConfigError(KGError, ValueError):
    """Invalid problem, run or study configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(KGError, RuntimeError):
    """Base class for failures during time marching."""

    def __init__(self, message, step=None):
        self.step = step
        self.message = message
        super().__init__(message)

    def __str__(self):
        # the step may be attached after construction by the time loop
        if self.step is None:
            return self.message
        return f"{self.message} (step {self.step})"


class NonlinearSolveError(NumericalError):
    """Fixed-point iteration of the implicit scheme did not converge."""

    def __init__(self, iterations, residual, step=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"fixed-point iteration did not converge after {iterations} iterations, "
            f"last update {residual:.3e}",
            step=step,
        )


class BlowUpError(NumericalError):
    """The numerical solution became non-finite or exceeded the blow-up threshold."""
