"""Sparse regularization paths via generalized linearized Bregman iterations.

The solver traces the whole path of a sparse estimator for linear,
logistic, Ising (composite and minimum probability flow) and general
discrete Markov random field losses; companion modules provide
simulators, evaluation metrics, a sharded logistic engine and theory
diagnostics.  Runs are deterministic down to the byte for a fixed seed
and configuration, independent of shard count.
"""

from .evaluate import (CVReport, irr_constant, kfold_cv_ising_mdc,
                       kfold_cv_logistic, mdc, pair_marginals, path_auc,
                       sign_consistency_scan)
from .exceptions import ConvergenceError, DivergenceError
from .losses import (LOSS_KINDS, Dataset, GroupMRFLoss, IsingCompositeLoss,
                     IsingMPFLoss, LinearLoss, LogisticLoss, LossModel, Theta,
                     curvature_bound, make_loss, pack_theta, pair_indices,
                     symmetric_from_pairs)
from .parallel import (ShardPlan, parallel_logistic_path, plan_shards,
                       scaling_benchmark)
from .rng import substream
from .simulate import (IsingSpec, LogisticSpec, enumerate_states,
                       exact_ising_distribution, gen_ising, gen_logistic,
                       gibbs_sample, grid_edges, grid_ising_params, pair_rank,
                       toeplitz_design_cov)
from .solver import (Checkpoint, Path, SolverConfig, SolverState,
                     block_soft_threshold, bregman_potential, fit_oracle,
                     initial_state, potential_trace, resolve_delta, run_path,
                     soft_threshold, step, stop_iteration_bound)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "substream",
    "ConvergenceError",
    "DivergenceError",
    "LOSS_KINDS",
    "Theta",
    "Dataset",
    "LossModel",
    "LinearLoss",
    "LogisticLoss",
    "IsingCompositeLoss",
    "IsingMPFLoss",
    "GroupMRFLoss",
    "make_loss",
    "curvature_bound",
    "pack_theta",
    "pair_indices",
    "symmetric_from_pairs",
    "soft_threshold",
    "block_soft_threshold",
    "resolve_delta",
    "SolverConfig",
    "SolverState",
    "initial_state",
    "step",
    "run_path",
    "Checkpoint",
    "Path",
    "fit_oracle",
    "bregman_potential",
    "potential_trace",
    "stop_iteration_bound",
    "LogisticSpec",
    "IsingSpec",
    "gen_logistic",
    "gen_ising",
    "toeplitz_design_cov",
    "grid_edges",
    "pair_rank",
    "grid_ising_params",
    "gibbs_sample",
    "enumerate_states",
    "exact_ising_distribution",
    "path_auc",
    "pair_marginals",
    "mdc",
    "irr_constant",
    "sign_consistency_scan",
    "CVReport",
    "kfold_cv_logistic",
    "kfold_cv_ising_mdc",
    "ShardPlan",
    "plan_shards",
    "parallel_logistic_path",
    "scaling_benchmark",
]
