"""Regularization paths over a decreasing lambda1 grid.

Each grid point is warm-started from the previous solution.  The sequential
strong rule discards coordinate j at lambda[k] when

    |g_j(beta^[k-1])| < w_j * (2 * lambda[k] - lambda[k-1])

and a KKT recheck on the discarded set puts back any coordinate it got wrong
before the solution is accepted.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import DataError, NonConvergenceError
from .solver import FitState, SolverConfig, _Problem, check_standardized


@dataclass(frozen=True)
class PathConfig:
    nlambda: int = 100
    lambda_min_ratio: float | None = None   # None: 1e-4 if n < p else 1e-2
    lambda2: float = 0.0
    use_strong_rule: bool = True
    kkt_slack: float = 1e-6
    early_exit: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.nlambda < 2:
            raise ValueError("nlambda must be >= 2")
        if self.lambda_min_ratio is not None and not 0 < self.lambda_min_ratio < 1:
            raise ValueError("lambda_min_ratio must lie in (0, 1)")
        if not (np.isfinite(self.lambda2) and self.lambda2 >= 0):
            raise ValueError("lambda2 must be finite and >= 0")

    def ratio_for(self, n, p):
        if self.lambda_min_ratio is not None:
            return self.lambda_min_ratio
        return 1e-4 if n < p else 1e-2


@dataclass(frozen=True, eq=False)
class SolutionPath:
    lambda1_grid: np.ndarray
    intercepts: np.ndarray
    coefficients: sparse.csr_matrix      # K x p, standardized scale
    nonzero_counts: np.ndarray
    kkt_max_violation: np.ndarray
    cycles_used: np.ndarray
    lambda2: float
    weights: np.ndarray
    lambda_min_ratio: float

    def __len__(self):
        return self.lambda1_grid.shape[0]

    @property
    def p(self):
        return self.coefficients.shape[1]

    def coef(self, k):
        return self.coefficients[k].toarray().ravel()

    def state(self, k, data):
        return FitState.from_coefficients(data, self.intercepts[k], self.coef(k))

    def decision_values(self, z):
        """Scores of standardized rows ``z`` at every grid point, shape (rows, K)."""
        return self.intercepts[None, :] + (self.coefficients @ np.asarray(z).T).T


def _null_state(prob, cfg):
    """Intercept-only fit (beta = 0) by iterating the intercept update."""
    data = prob.data
    state = FitState.zeros(data)
    prob.solve(state, np.zeros(data.p), 0.0, np.empty(0, dtype=np.int64), cfg)
    return state


def _weights(data, weights):
    if weights is None:
        return np.ones(data.p)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (data.p,):
        raise ValueError(f"weights have shape {w.shape}, expected ({data.p},)")
    if not np.all(np.isfinite(w) & (w > 0)):
        raise ValueError("weights must be positive and finite")
    return w


def _lambda_max(prob, w, cfg):
    prob.data.check_fittable()
    state = _null_state(prob, cfg)
    g = prob.gradients(state.margins)
    lmax = float(np.max(np.abs(g) / w))
    if not lmax > 0:
        raise DataError("no feature is correlated with the labels; the null model is optimal")
    return lmax, state, g


def lambda_max(data, weights=None, cfg=None):
    """Smallest lambda1 at which beta = 0 satisfies the optimality conditions."""
    check_standardized(data)
    prob = _Problem(data)
    return _lambda_max(prob, _weights(data, weights), cfg or SolverConfig())[0]


def lambda_grid(lmax, cfg=None, n=None, p=None, ratio=None):
    """Log-spaced grid from ``lmax`` down to ``ratio * lmax`` with exact endpoints."""
    cfg = cfg or PathConfig()
    if not lmax > 0:
        raise ValueError("lmax must be positive")
    if ratio is None:
        if cfg.lambda_min_ratio is None and (n is None or p is None):
            raise ValueError("need n and p to pick the default lambda_min_ratio")
        ratio = cfg.ratio_for(n, p)
    K = cfg.nlambda
    grid = lmax * np.power(ratio, np.arange(K) / (K - 1))
    grid[0] = lmax
    grid[-1] = ratio * lmax
    return grid


def strong_rule_screen(grad, lambda_prev, lambda_next, weights):
    """Indices that survive screening, from the gradient at the previous solution."""
    if lambda_next > lambda_prev:
        raise ValueError("lambda_next must not exceed lambda_prev")
    return np.flatnonzero(np.abs(grad) >= weights * (2.0 * lambda_next - lambda_prev))


def kkt_from_gradient(grad, beta, thresh, lambda2):
    active = np.abs(grad + thresh * np.sign(beta) + lambda2 * beta)
    inactive = np.maximum(0.0, np.abs(grad) - thresh)
    return np.where(beta != 0, active, inactive)


def fit_path(data, cfg=None, weights=None, grid=None):
    """Solve over the whole lambda1 grid with warm starts.

    ``grid`` overrides the automatically placed grid (cross-validation folds
    reuse the full-data grid); its first point need not be lambda_max.
    """
    cfg = cfg or PathConfig()
    check_standardized(data)
    w = _weights(data, weights)
    prob = _Problem(data)
    lmax, state, g = _lambda_max(prob, w, cfg.solver)
    ratio = cfg.ratio_for(data.n, data.p)
    if grid is None:
        grid = lambda_grid(lmax, cfg, ratio=ratio)
    else:
        grid = np.asarray(grid, dtype=np.float64)
        if np.any(np.diff(grid) >= 0):
            raise ValueError("lambda grid must be strictly decreasing")
    lam2 = cfg.lambda2
    K, p = grid.shape[0], data.p
    intercepts = np.empty(K)
    nnz = np.zeros(K, dtype=np.int64)
    kkt_max = np.empty(K)
    cycles = np.zeros(K, dtype=np.int64)
    rows, cols, vals = [], [], []
    lam_prev = max(lmax, grid[0])
    beta_prev_zero = True
    for k in range(K):
        lam = grid[k]
        thresh = lam * w
        state.cycles = 0
        if lam >= lmax and beta_prev_zero:
            # beta = 0 is exact here; the null fit already solved the intercept
            pass
        else:
            if cfg.use_strong_rule:
                survive = np.abs(g) >= w * (2.0 * lam - lam_prev)
                survive |= state.beta != 0
            else:
                survive = np.ones(p, dtype=bool)
            while True:
                try:
                    prob.solve(state, thresh, lam2, np.flatnonzero(survive), cfg.solver)
                except NonConvergenceError as exc:
                    raise NonConvergenceError(f"grid point k={k + 1} (lambda1={lam:.6g}): {exc}",
                                              exc.state) from exc
                g = prob.gradients(state.margins)
                missed = ~survive & (np.abs(g) > thresh + cfg.kkt_slack)
                if not missed.any():
                    break
                survive |= missed
        beta_prev_zero = not state.beta.any()
        idx = np.flatnonzero(state.beta)
        rows.append(np.full(idx.shape[0], k))
        cols.append(idx)
        vals.append(state.beta[idx])
        intercepts[k] = state.beta0
        nnz[k] = idx.shape[0]
        kkt_max[k] = float(np.max(kkt_from_gradient(g, state.beta, thresh, lam2), initial=0.0))
        cycles[k] = state.cycles
        lam_prev = lam
        if cfg.early_exit and nnz[k] > min(data.n, p):
            K = k + 1
            break
    coefs = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(K, p))
    return SolutionPath(
        lambda1_grid=grid[:K].copy(), intercepts=intercepts[:K], coefficients=coefs,
        nonzero_counts=nnz[:K], kkt_max_violation=kkt_max[:K], cycles_used=cycles[:K],
        lambda2=lam2, weights=w, lambda_min_ratio=ratio)


def adaptive_weights(beta_enet, n):
    """w_j = 1 / (|beta_j| + 1/n) from a first-stage elastic-net fit."""
    return 1.0 / (np.abs(np.asarray(beta_enet, dtype=np.float64)) + 1.0 / n)


def fit_adaptive_path(data, cfg, enet_solution, grid=None):
    """Second stage of the adaptive elastic net: a weighted path.

    ``enet_solution`` is (beta0, beta) from an elastic-net fit on ``data``.
    """
    _, beta = enet_solution
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (data.p,):
        raise ValueError(f"elastic-net coefficients have shape {beta.shape}, expected ({data.p},)")
    return fit_path(data, cfg, weights=adaptive_weights(beta, data.n), grid=grid)


def _fmt(v):
    return format(float(v), ".17g")


def write_path(sp, tsv_path, coef_path, standardizer=None, feature_index=None):
    """Write the per-grid-point summary TSV and the (k, j, value) triplet file.

    With ``standardizer`` the intercepts and coefficients are mapped back to
    the original feature scale and ``j`` is the 1-based raw column index.
    """
    B = sp.coefficients.toarray()
    b0 = sp.intercepts.copy()
    scale = "standardized"
    cols = np.arange(sp.p) if feature_index is None else np.asarray(feature_index)
    if standardizer is not None:
        kept = standardizer.kept
        m, s = standardizer.means[kept], standardizer.scales[kept]
        B = B / s
        b0 = b0 - B @ m
        cols = kept
        scale = "original"
    with open(tsv_path, "w") as fh:
        fh.write(f"# nlambda={len(sp)}\n")
        fh.write(f"# lambda_min_ratio={_fmt(sp.lambda_min_ratio)}\n")
        fh.write(f"# lambda2={_fmt(sp.lambda2)}\n")
        fh.write(f"# coef_scale={scale}\n")
        fh.write("k\tlambda1\tintercept\tnnz\tmax_kkt_violation\n")
        for k in range(len(sp)):
            fh.write(f"{k + 1}\t{_fmt(sp.lambda1_grid[k])}\t{_fmt(b0[k])}\t"
                     f"{sp.nonzero_counts[k]}\t{_fmt(sp.kkt_max_violation[k])}\n")
    with open(coef_path, "w") as fh:
        fh.write("k\tj\tvalue\n")
        for k in range(len(sp)):
            for j in np.flatnonzero(B[k]):
                fh.write(f"{k + 1}\t{cols[j] + 1}\t{_fmt(B[k, j])}\n")
