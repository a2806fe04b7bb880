"""Exception types shared across the package.

Kept in one place so the command-line layer can map each class to a
stable process exit code.
"""


class ParameterError(ValueError):
    """Invalid or inconsistent model/algorithm parameters."""


class TruncationError(RuntimeError):
    """A series or iteration failed to converge within its term cap.

    Carries the magnitude of the last computed term in ``last_term``
    when the raising site knows it.
    """

    def __init__(self, message, last_term=None):
        super().__init__(message)
        self.last_term = last_term


class OracleError(RuntimeError):
    """A cross-validation oracle could not be evaluated reliably.

    Raised instead of returning silently wrong reference values, e.g.
    when a Laplace-domain series diverges on the inversion contour.
    """


class SimulationError(RuntimeError):
    """A stochastic simulation exceeded its safety limits."""
