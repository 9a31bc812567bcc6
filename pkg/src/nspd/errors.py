"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """An input vector does not match the operator or function dimension."""


class ConfigurationError(ValueError):
    """Solver or schedule parameters violate a required inequality."""


class DivergenceError(RuntimeError):
    """A solver produced a non-finite iterate."""

    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class InnerSolverError(RuntimeError):
    """An inner subproblem solver did not reach its tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


class UnsupportedMetricError(ValueError):
    """A metric needs a closed form the problem does not provide."""


class OracleFailureError(RuntimeError):
    """The two reference solvers disagree; no trusted optimum is available."""

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values or {}


class CertificateUnavailableError(ValueError):
    """A bound needs a reference point or constant that was not supplied."""
