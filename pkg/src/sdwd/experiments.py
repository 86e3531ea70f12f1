"""Replicated simulation studies: test error and variable selection."""
from dataclasses import dataclass, field

import numpy as np

from .cv import CvConfig, tune_on_validation
from .model import predict_class
from .path import PathConfig
from .simgen import SimSpec, bayes_error, generate, true_variables


@dataclass(frozen=True)
class StudyConfig:
    example_id: int = 1
    mode: str = "lasso"
    replicates: int = 20
    p: int = 300
    n_train: int = 50
    n_valid: int = 50
    n_test: int = 10_000
    seed: int = 0
    cv: CvConfig = field(default_factory=lambda: CvConfig(path_cfg=PathConfig()))


@dataclass(frozen=True)
class Replicate:
    seed: int
    test_error: float
    correct: int          # true variables selected
    incorrect: int        # noise variables selected
    lambda1: float
    lambda2: float


def run_replicate(cfg, seed):
    spec = SimSpec(cfg.example_id, cfg.p, cfg.n_train, cfg.n_valid, cfg.n_test, seed)
    train, valid, test = generate(spec)
    res = tune_on_validation(train, valid, cfg.cv, cfg.mode)
    m = res.final_model
    err = float(np.mean(predict_class(m, test.x) != test.y))
    truth = set(true_variables(cfg.example_id).tolist())
    chosen = set(m.support.tolist())
    return Replicate(seed, err, len(chosen & truth), len(chosen - truth),
                     res.best_lambda1, res.best_lambda2)


def run_study(cfg):
    """One replicate per seed cfg.seed, cfg.seed + 1, ..."""
    return [run_replicate(cfg, cfg.seed + r) for r in range(cfg.replicates)]


def summarize(reps, example_id=None):
    err = np.array([r.test_error for r in reps])
    out = {
        "replicates": len(reps),
        "mean_error": float(err.mean()),
        "se_error": float(err.std(ddof=1) / np.sqrt(len(err))) if len(err) > 1 else 0.0,
        "median_correct": float(np.median([r.correct for r in reps])),
        "median_incorrect": float(np.median([r.incorrect for r in reps])),
    }
    if example_id is not None:
        out["bayes_error"] = bayes_error(example_id)
    return out
