"""Model selection over the (lambda1, lambda2) grid.

Two protocols share one engine: stratified K-fold cross-validation, and
tuning on an explicit validation set (one split).  For every lambda2 a
single lambda1 grid, placed on the full data, is reused by every split so
errors at grid index k can be averaged.  Everything fitted inside a split
(standardization, adaptive weights, paths) sees that split's training rows
only.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .data import standardize
from .errors import DataError, NonConvergenceError
from .model import MODES, model_from_path
from .path import PathConfig, adaptive_weights, fit_path, lambda_grid, lambda_max

log = logging.getLogger(__name__)

LAMBDA2_GRID = (1e-4, 1e-3, 1e-2, 0.1, 1.0, 5.0, 10.0)


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5
    lambda2_grid: tuple = LAMBDA2_GRID
    path_cfg: PathConfig = field(default_factory=PathConfig)
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if len(self.lambda2_grid) == 0 or any(not l2 >= 0 for l2 in self.lambda2_grid):
            raise ValueError("lambda2_grid must be nonempty and nonnegative")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(eq=False)
class CvResult:
    mode: str
    lambda2_grid: np.ndarray           # (L,)
    lambda1_grids: np.ndarray          # (L, K)
    error_surface: np.ndarray          # (L, K) mean misclassification
    se_surface: np.ndarray
    nnz_surface: np.ndarray
    best_index: tuple
    best_lambda1: float
    best_lambda2: float
    final_model: object = None
    stage1_index: np.ndarray | None = None

    def write_tsv(self, path):
        with open(path, "w") as fh:
            fh.write("lambda2\tlambda1\tmean_error\tse\tnnz_mean\n")
            for l, l2 in enumerate(self.lambda2_grid):
                for k in range(self.lambda1_grids.shape[1]):
                    fh.write("\t".join(format(float(v), ".17g") for v in (
                        l2, self.lambda1_grids[l, k], self.error_surface[l, k],
                        self.se_surface[l, k], self.nnz_surface[l, k])) + "\n")


def kfold_split(n, folds, seed, labels):
    """Stratified fold labels in 0..folds-1, deterministic in ``seed``.

    Each class is shuffled and dealt round-robin, continuing the deal from
    one class to the next, so fold sizes and per-class counts each differ
    by at most one.  ``folds == n`` gives leave-one-out.
    """
    labels = np.asarray(labels)
    if labels.shape[0] != n:
        raise ValueError("labels must have length n")
    if not 2 <= folds <= n:
        raise ValueError(f"folds must lie in [2, n={n}], got {folds}")
    rng = np.random.Generator(np.random.PCG64(seed))
    classes = np.unique(labels)
    if folds < n:
        for c in classes:
            count = int(np.sum(labels == c))
            if count < folds:
                raise DataError(f"class {c} has {count} members, fewer than {folds} folds")
    order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in classes])
    assign = np.empty(n, dtype=np.int64)
    assign[order] = np.arange(n) % folds
    return assign


def _misclassification(sp, std, test_raw):
    z = std.transform(test_raw.x)
    pred = np.where(sp.decision_values(z) >= 0, 1.0, -1.0)
    return np.mean(pred != test_raw.y[:, None], axis=0)


def _pad(v, K, fill):
    if v.shape[0] == K:
        return v
    return np.concatenate([v, np.full(K - v.shape[0], fill)])


def fit_split_path(train_raw, grid, pcfg, weights_from=None):
    """Standardize a training portion and fit its path on a fixed grid.

    ``weights_from`` is an elastic-net path on the same portion plus a grid
    index; when given, the path is the adaptive second stage.
    """
    data, std = standardize(train_raw)
    weights = None
    if weights_from is not None:
        enet_path, k1 = weights_from
        weights = adaptive_weights(enet_path.coef(k1), data.n)
    return fit_path(data, pcfg, weights=weights, grid=grid), std


def _select(errors, K):
    # smallest error, then the largest lambda1 (lowest index)
    e = np.where(np.isnan(errors), np.inf, errors)
    return int(np.argmin(e[:K]))


def _one_lambda2(full_raw, splits, pcfg, mode, l2_index):
    K = pcfg.nlambda
    full, _ = standardize(full_raw)
    grid = lambda_grid(lambda_max(full, cfg=pcfg.solver), pcfg, full.n, full.p)

    def run(grid, weight_paths=None):
        errs, nnzs, paths = [], [], []
        for s, (train_raw, test_raw) in enumerate(splits):
            wf = None if weight_paths is None else weight_paths[s]
            try:
                sp, std = fit_split_path(train_raw, grid, pcfg, wf)
            except NonConvergenceError as exc:
                raise NonConvergenceError(
                    f"split {s + 1}, lambda2={pcfg.lambda2:g}: {exc}", exc.state) from exc
            errs.append(_pad(_misclassification(sp, std, test_raw), K, np.nan))
            nnzs.append(_pad(sp.nonzero_counts.astype(float), K, np.nan))
            paths.append(sp)
        return np.array(errs), np.array(nnzs), paths

    errs, nnzs, paths = run(grid)
    stage1 = None
    if mode == "aenet":
        stage1 = _select(errs.mean(axis=0), K)
        full_enet = fit_path(full, pcfg, grid=grid)
        w_full = adaptive_weights(full_enet.coef(min(stage1, len(full_enet) - 1)), full.n)
        grid = lambda_grid(lambda_max(full, w_full, pcfg.solver), pcfg, full.n, full.p)
        weight_paths = [(sp, min(stage1, len(sp) - 1)) for sp in paths]
        errs, nnzs, paths = run(grid, weight_paths)
    log.info("lambda2=%g done (%d splits)", pcfg.lambda2, len(splits))
    return l2_index, grid, errs, nnzs, stage1


def _tune(full_raw, splits, cfg, mode, se_fn):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    lam2s = (0.0,) if mode == "lasso" else tuple(float(v) for v in cfg.lambda2_grid)
    tasks = [(full_raw, splits, replace(cfg.path_cfg, lambda2=l2), mode, l)
             for l, l2 in enumerate(lam2s)]
    if cfg.threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda t: _one_lambda2(*t), tasks))
    else:
        results = [_one_lambda2(*t) for t in tasks]
    results.sort(key=lambda r: r[0])
    L, K = len(lam2s), cfg.path_cfg.nlambda
    grids = np.empty((L, K))
    err = np.empty((L, K))
    se = np.empty((L, K))
    nnz = np.empty((L, K))
    stage1 = np.full(L, -1, dtype=np.int64)
    for l, grid, errs, nnzs, s1 in results:
        grids[l] = grid
        err[l] = errs.mean(axis=0)
        se[l] = se_fn(errs)
        nnz[l] = nnzs.mean(axis=0)
        if s1 is not None:
            stage1[l] = s1
    # smallest error, then largest lambda1, then smallest lambda2
    cands = [(err[l, k] if np.isfinite(err[l, k]) else np.inf, -grids[l, k], lam2s[l], l, k)
             for l in range(L) for k in range(K)]
    best = min(cands)
    bl, bk = best[3], best[4]
    result = CvResult(
        mode=mode, lambda2_grid=np.array(lam2s), lambda1_grids=grids, error_surface=err,
        se_surface=se, nnz_surface=nnz, best_index=(bl, bk),
        best_lambda1=float(grids[bl, bk]), best_lambda2=lam2s[bl],
        stage1_index=stage1 if mode == "aenet" else None)
    result.final_model = _refit(full_raw, result, cfg)
    return result


def _refit(full_raw, result, cfg):
    bl, bk = result.best_index
    pcfg = replace(cfg.path_cfg, lambda2=result.best_lambda2)
    full, std = standardize(full_raw)
    grid = result.lambda1_grids[bl, :bk + 1]
    weights = None
    meta = {"n": full.n, "p": full_raw.p, "nlambda": cfg.path_cfg.nlambda,
            "lambda2_grid_size": len(result.lambda2_grid), "seed": cfg.seed}
    if result.mode == "aenet":
        s1 = int(result.stage1_index[bl])
        enet_grid = lambda_grid(lambda_max(full, cfg=pcfg.solver), pcfg, full.n, full.p)
        enet = fit_path(full, pcfg, grid=enet_grid[:s1 + 1])
        weights = adaptive_weights(enet.coef(len(enet) - 1), full.n)
        meta["stage1_lambda1"] = float(enet_grid[s1])
    sp = fit_path(full, pcfg, weights=weights, grid=grid)
    k = len(sp) - 1
    meta["kkt_max"] = float(sp.kkt_max_violation[k])
    return model_from_path(sp, k, std, result.mode, full_raw.label_names, meta)


def _fold_se(errs):
    if errs.shape[0] < 2:
        return np.zeros(errs.shape[1])
    return errs.std(axis=0, ddof=1) / np.sqrt(errs.shape[0])


def cross_validate(data, cfg=None, mode="enet"):
    """K-fold CV on raw (unstandardized) ``data``; refits the winner on all rows."""
    cfg = cfg or CvConfig()
    data.check_fittable()
    assign = kfold_split(data.n, cfg.folds, cfg.seed, data.y)
    splits = []
    for f in range(cfg.folds):
        test = assign == f
        train = data.subset(np.flatnonzero(~test))
        train.check_fittable()
        splits.append((train, data.subset(np.flatnonzero(test))))
    return _tune(data, splits, cfg, mode, _fold_se)


def tune_on_validation(train, valid, cfg=None, mode="enet"):
    """Pick (lambda1, lambda2) by misclassification on a held-out validation set."""
    cfg = cfg or CvConfig()
    train.check_fittable()
    n_valid = valid.n

    def se_fn(errs):
        e = errs[0]
        return np.sqrt(np.clip(e * (1.0 - e), 0.0, None) / n_valid)

    return _tune(train, [(train, valid)], cfg, mode, se_fn)
