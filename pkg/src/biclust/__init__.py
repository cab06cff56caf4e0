"""Estimation and completion of partially observed matrices with
biclustering structure by constrained least squares."""
from .adapt import AdaptResult, KGrid, SplitData, adaptive_fit, estimate_p, fit_unknown_p, select_k, split_data
from .core import (
    BiclusterAssignment,
    BlockValueMatrix,
    ModelSpec,
    ObservedMatrix,
    materialize_theta,
    restricted_inner,
    restricted_sq_norm,
)
from .estimator import (
    BudgetExceededError,
    FitConfig,
    FitResult,
    MonotonicityError,
    alternating_fit,
    block_means,
    clip_block_values,
    exact_fit,
    fit_given_labels,
    fit_observed,
    ls_objective,
    refine_labels,
    surrogate,
)
from .graphon import GraphonSpec, estimate_graphon, graphon_bandwidth, graphon_mse, sample_graphon_network
from .harness import Cell, SweepConfig, TrialRecord, rate_report, run_sweep, run_trial
from .simulate import NoiseSpec, derive_seed, gen_bernoulli, gen_gaussian, gen_mask, gen_random_model, make_rng

__version__ = "0.1.0"
