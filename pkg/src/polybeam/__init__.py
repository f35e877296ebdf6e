"""Algebraic mmWave beam alignment via truncated Taylor polynomials."""

from polybeam.model import (
    BeamAngles,
    ChannelMatrix,
    RateParams,
    data_rate,
    exhaustive_search,
    rate_gradient_fd,
    steering_vector,
)
from polybeam.series import TruncatedSeries, rate_series, series_partial
from polybeam.truncate import SparsePolynomial, approximation_error, threshold_select
from polybeam.polytope import NewtonPolytope, convex_hull, root_bound_eta
from polybeam.solver import RootSet, solve_system
from polybeam.pipeline import AlignmentConfig, ExperimentRecord, align, run_sweep

__version__ = "0.1.0"
