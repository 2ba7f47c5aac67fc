"""Exception types shared across the package.

The CLI maps these onto exit codes: parameter/data problems exit with 3,
numerical non-convergence with 4.
"""


class FluxDiodeError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(FluxDiodeError, ValueError):
    """Invalid parameter value, missing key, or violated invariant."""


class DataError(FluxDiodeError, ValueError):
    """Malformed or degenerate input data (grids, routes, sweeps)."""


class ResourceLimitError(FluxDiodeError, MemoryError):
    """A requested computation would exceed the memory budget."""


class ConvergenceError(FluxDiodeError, RuntimeError):
    """An iterative procedure failed to converge."""


class SeriesError(ConvergenceError):
    """Hypergeometric series hit the term cap before converging.

    Carries the partial sum and the magnitude of the last term so the
    caller can judge how bad the truncation is.
    """

    def __init__(self, message, partial_sum=None, last_term=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.last_term = last_term
