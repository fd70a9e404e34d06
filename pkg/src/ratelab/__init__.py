"""Convergence-rate laboratory for GD, momentum, RMSprop and Adam."""

from ._backend import NAME as BACKEND
from .errors import DivergenceError, EigenSolverError, InsufficientDataError, UsageError
from .harness import (ExperimentSpec, ObjectiveSpec, OptimizerSpec, emit_results, run_experiment,
                      run_separation, validate_adam_global_config)
from .objectives import Objective, make_quadratic, make_quartic_perturbed
from .optim import Kind, OptimizerConfig, OptimizerState, Termination, Trajectory, run, step_recursive
from .ratefit import RateEstimate, Verdict, adjudicate, estimate_rate, sup_ratio_statistic
from .spectral import mu_pm, predicted_rate, spectral_radius

__version__ = "0.1.0"
