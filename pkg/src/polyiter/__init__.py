"""Policy iteration for finite zero-sum perfect-information stochastic games."""

from .game import GameInstance, PayoffMode, count_m, count_m1, validate
from .linalg import EigenPair, additive_eigenpair, affine_fixed_point, spectral_radius
from .perron import MatrixFamily, hull_spectral_radius, mean_return_times
from .policy_iteration import (
    SolverConfig,
    bound_hmz,
    bound_mean,
    bound_thm3,
    certify_trace,
    solve_discounted,
    solve_mean,
)
from .shapley import ImprovementConfig, eval_operator
from .transforms import lift_solution, mean_to_discounted, scale_instance, verify_contraction

__all__ = [
    "EigenPair",
    "GameInstance",
    "ImprovementConfig",
    "MatrixFamily",
    "PayoffMode",
    "SolverConfig",
    "additive_eigenpair",
    "affine_fixed_point",
    "bound_hmz",
    "bound_mean",
    "bound_thm3",
    "certify_trace",
    "count_m",
    "count_m1",
    "eval_operator",
    "hull_spectral_radius",
    "lift_solution",
    "mean_return_times",
    "mean_to_discounted",
    "scale_instance",
    "solve_discounted",
    "solve_mean",
    "spectral_radius",
    "validate",
    "verify_contraction",
]
