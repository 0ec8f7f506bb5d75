"""Hyperbolic cross trigonometric polynomials, sampling recovery and discretization experiments."""

from .classes import WClassSpec, a_exponent, h_class_sample, h_sample, w_sample
from .cutoff import balancing_threshold, block_decompose, bound_value, budget_schedule
from .discretization import dt1_budget, dt1_point_search, marcinkiewicz_estimate, marcinkiewicz_q2
from .index_sets import FrequencySet, hyperbolic_cross, parallelepiped
from .sampling_recovery import (
    PointSet,
    SmolyakRecovery,
    WeightedLeastSquaresRecovery,
    induced_cubature,
    is_nl_net,
    recovery_error,
    sparse_grid,
)
from .trigpoly import GridSpec, TrigPoly, analyze_grid, evaluate_grid, norm

__version__ = "0.1.0"

__all__ = [
    "FrequencySet", "GridSpec", "PointSet", "SmolyakRecovery", "TrigPoly", "WClassSpec",
    "WeightedLeastSquaresRecovery", "a_exponent", "analyze_grid", "balancing_threshold",
    "block_decompose", "bound_value", "budget_schedule", "dt1_budget", "dt1_point_search",
    "evaluate_grid", "h_class_sample", "h_sample", "hyperbolic_cross", "induced_cubature",
    "is_nl_net", "marcinkiewicz_estimate", "marcinkiewicz_q2", "norm", "parallelepiped",
    "recovery_error", "sparse_grid", "w_sample",
]
