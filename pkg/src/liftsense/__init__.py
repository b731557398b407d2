"""Rank-1 matrix sensing, its tensor lifting, and tools for studying how
lifting turns spurious second-order points into strict saddles."""

from .landscape import Classification, LandscapeReport, classify, escape_direction, find_sops, min_eigenpair
from .objective import (
    Problem,
    canonical_ground_truth,
    h_grad,
    h_hess,
    h_value,
    hl_grad,
    hl_hess_dense,
    hl_hvp,
    hl_value,
    materialize_lifted,
)
from .optimize import AdamConfig, TrialRecord, project_trajectory, run_adam, run_trial, success_rate
from .sensing import BenchmarkSpec, SensingOperator, make_benchmark, spectrum_constants
from .tensor import DenseTensor, best_rank1_projection, rank1_power
from .theory import BoundReport, beta_and_l_threshold, bound_report, check_distance_condition, lemma_bounds, region_bounds

__all__ = [
    "AdamConfig",
    "BenchmarkSpec",
    "BoundReport",
    "Classification",
    "DenseTensor",
    "LandscapeReport",
    "Problem",
    "SensingOperator",
    "TrialRecord",
    "beta_and_l_threshold",
    "best_rank1_projection",
    "bound_report",
    "canonical_ground_truth",
    "check_distance_condition",
    "classify",
    "escape_direction",
    "find_sops",
    "h_grad",
    "h_hess",
    "h_value",
    "hl_grad",
    "hl_hess_dense",
    "hl_hvp",
    "hl_value",
    "lemma_bounds",
    "make_benchmark",
    "materialize_lifted",
    "min_eigenpair",
    "project_trajectory",
    "rank1_power",
    "region_bounds",
    "run_adam",
    "run_trial",
    "spectrum_constants",
    "success_rate",
]
