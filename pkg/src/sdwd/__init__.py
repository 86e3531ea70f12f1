"""Sparse penalized distance weighted discrimination.

Lasso, elastic-net and adaptive elastic-net DWD fitted by majorized
coordinate descent over regularization paths, with cross-validation,
simulation designs and a reference proximal-gradient solver.
"""
from .cv import CvConfig, CvResult, cross_validate, kfold_split, tune_on_validation
from .data import Dataset, Standardizer, read_csv, read_sparse, standardize, write_csv
from .errors import DataError, NonConvergenceError
from .loss import dwd_loss, dwd_loss_deriv, soft_threshold
from .model import DwdModel, fit_model, load_model, predict_class, predict_score, save_model
from .oracle import compare, mutual_validation, oracle_fit
from .path import (PathConfig, SolutionPath, adaptive_weights, fit_adaptive_path, fit_path,
                   lambda_grid, lambda_max)
from .simgen import SimSpec, bayes_error, generate
from .solver import FitState, PenaltySpec, SolverConfig, fit_fixed, kkt_residuals, objective

__version__ = "0.1.0"

__all__ = [
    "CvConfig", "CvResult", "cross_validate", "kfold_split", "tune_on_validation",
    "Dataset", "Standardizer", "read_csv", "read_sparse", "standardize", "write_csv",
    "DataError", "NonConvergenceError",
    "dwd_loss", "dwd_loss_deriv", "soft_threshold",
    "DwdModel", "fit_model", "load_model", "predict_class", "predict_score", "save_model",
    "compare", "mutual_validation", "oracle_fit",
    "PathConfig", "SolutionPath", "adaptive_weights", "fit_adaptive_path", "fit_path",
    "lambda_grid", "lambda_max",
    "SimSpec", "bayes_error", "generate",
    "FitState", "PenaltySpec", "SolverConfig", "fit_fixed", "kkt_residuals", "objective",
]
