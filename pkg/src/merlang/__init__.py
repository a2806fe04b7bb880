"""Numerical library and simulator for the mixed time-changed Erlang queue.

Transient quantities of an M/Ek/1 queue run on the inverse of a mixed
stable subordinator clock, computed three independent ways: truncated
Mittag-Leffler convolution series, numerical inversion of closed-form
Laplace transforms, and Monte Carlo simulation.
"""

from .errors import ParameterError, TruncationError, OracleError, SimulationError
from .specfun import MLParams, mittag_leffler3, upper_incomplete_gamma
from .coeffs import QueueParams, SeriesConstants, coeff_a0_A0, coeff_block
from .laplace import (LTPoint, invert_lt, lt_busy, lt_event_survival, lt_kernel,
                      lt_mean, lt_p0, lt_pns, lt_service, lt_waiting, phi)
from .analytic import (Curve, CurveKind, GridKernel, TimeGrid, TruncationPolicy,
                       busy_period_cdf, grid_transform, kernel_on_grid,
                       mean_length_curve, nfold_convolve, p0_curve, pns_curve,
                       queue_length_pmf, service_density, survival_event_time)

__version__ = "0.1.0"

__all__ = [
    "ParameterError",
    "TruncationError",
    "OracleError",
    "SimulationError",
    "MLParams",
    "mittag_leffler3",
    "upper_incomplete_gamma",
    "QueueParams",
    "SeriesConstants",
    "coeff_a0_A0",
    "coeff_block",
    "LTPoint",
    "invert_lt",
    "lt_busy",
    "lt_event_survival",
    "lt_kernel",
    "lt_mean",
    "lt_p0",
    "lt_pns",
    "lt_service",
    "lt_waiting",
    "phi",
    "Curve",
    "CurveKind",
    "GridKernel",
    "TimeGrid",
    "TruncationPolicy",
    "busy_period_cdf",
    "grid_transform",
    "kernel_on_grid",
    "mean_length_curve",
    "nfold_convolve",
    "p0_curve",
    "pns_curve",
    "queue_length_pmf",
    "service_density",
    "survival_event_time",
    "__version__",
]
