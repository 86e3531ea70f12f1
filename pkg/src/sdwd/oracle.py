"""Reference solver: full-batch proximal gradient on the joint (beta0, beta).

Shares only the scalar loss functions with the coordinate-descent solver.
Slow by design and meant for small instances (n, p up to a few hundred).
"""
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError
from .loss import dwd_loss, dwd_loss_deriv, soft_threshold
from .solver import FitState, kkt_residuals, objective


@dataclass(frozen=True)
class OracleConfig:
    step: float | None = None      # None: 1 / Lipschitz bound of the smooth part
    max_iters: int = 1_000_000
    tol: float = 1e-12
    grad_tol: float = 1e-10

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.max_iters < 1 or not self.tol > 0 or not self.grad_tol > 0:
            raise ValueError("max_iters, tol and grad_tol must be positive")


def lipschitz_bound(x, lambda2):
    # V'' <= 4, so the Hessian of (1/n) sum V(z_i'theta) is below (4/n) Z'Z
    z = np.column_stack([np.ones(x.shape[0]), x])
    return 4.0 * np.linalg.norm(z, 2) ** 2 / x.shape[0] + lambda2


def _smooth(theta, x, y, lambda2):
    u = y * (theta[0] + x @ theta[1:])
    val = np.mean(dwd_loss(u)) + 0.5 * lambda2 * theta[1:] @ theta[1:]
    r = dwd_loss_deriv(u) * y / x.shape[0]
    grad = np.concatenate([[r.sum()], x.T @ r + lambda2 * theta[1:]])
    return val, grad


def _prox(theta, thresh):
    out = theta.copy()
    out[1:] = soft_threshold(theta[1:], thresh)
    return out


def oracle_fit(data, pen, cfg=None, return_history=False):
    """Minimize the penalized objective by accelerated proximal gradient.

    Momentum is reset whenever the extrapolated step would raise the
    objective; the fallback is a plain proximal step from the last accepted
    point, so the accepted objective sequence never increases.  Stops once
    the objective change falls below ``tol`` and the proximal gradient
    mapping is below ``grad_tol``.
    """
    cfg = cfg or OracleConfig()
    x, y = data.x, data.y
    thresh = pen.thresholds(data.p)
    step = cfg.step if cfg.step is not None else 1.0 / lipschitz_bound(x, pen.lambda2)

    def total(theta):
        f, _ = _smooth(theta, x, y, pen.lambda2)
        return f + float(thresh @ np.abs(theta[1:]))

    theta = np.zeros(data.p + 1)
    f_cur = total(theta)
    look, t_k = theta, 1.0
    history = [f_cur]
    for it in range(cfg.max_iters):
        _, g = _smooth(look, x, y, pen.lambda2)
        cand = _prox(look - step * g, step * thresh)
        f_cand = total(cand)
        if f_cand > f_cur:
            _, g = _smooth(theta, x, y, pen.lambda2)
            cand = _prox(theta - step * g, step * thresh)
            f_cand = total(cand)
            t_k = 1.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        prev, theta = theta, cand
        f_prev, f_cur = f_cur, f_cand
        look = theta + ((t_k - 1.0) / t_next) * (theta - prev)
        t_k = t_next
        history.append(f_cur)
        if abs(f_prev - f_cur) < cfg.tol:
            _, g = _smooth(theta, x, y, pen.lambda2)
            mapping = (theta - _prox(theta - step * g, step * thresh)) / step
            if np.max(np.abs(mapping)) < cfg.grad_tol:
                break
    else:
        raise NonConvergenceError(f"oracle did not converge within {cfg.max_iters} iterations")
    state = FitState.from_coefficients(data, theta[0], theta[1:])
    state.cycles = it + 1
    if return_history:
        return state, history
    return state


@dataclass(frozen=True)
class Comparison:
    objective_a: float
    objective_b: float
    objective_gap: float
    coef_gap: float
    support_diff: frozenset
    kkt_a: float
    kkt_b: float

    def relative_gap(self):
        return self.objective_gap / (1.0 + abs(self.objective_b))


def compare(a, b, data, pen, zero_tol=1e-8):
    """Summarize how far state ``a`` is from state ``b`` (objective gap is a - b)."""
    if a.beta.shape != b.beta.shape:
        raise ValueError("states have different dimensions")
    fa, fb = objective(a, data, pen), objective(b, data, pen)
    coef = max(abs(a.beta0 - b.beta0), float(np.max(np.abs(a.beta - b.beta), initial=0.0)))
    sa = set(np.flatnonzero(np.abs(a.beta) > zero_tol).tolist())
    sb = set(np.flatnonzero(np.abs(b.beta) > zero_tol).tolist())
    return Comparison(
        objective_a=fa, objective_b=fb, objective_gap=fa - fb, coef_gap=coef,
        support_diff=frozenset(sa ^ sb),
        kkt_a=float(np.max(kkt_residuals(a, data, pen), initial=0.0)),
        kkt_b=float(np.max(kkt_residuals(b, data, pen), initial=0.0)),
    )


@dataclass(frozen=True)
class BatteryRecord:
    index: int
    n: int
    p: int
    mode: str
    lambda1: float
    lambda2: float
    relative_gap: float
    coef_gap: float
    passed: bool
    note: str = ""


def random_instance(rng, n_range=(10, 50), p_range=(5, 20)):
    """Standardized Gaussian design with noisy linear labels, both classes >= 2."""
    from .data import Dataset, standardize

    n = int(rng.integers(n_range[0], n_range[1] + 1))
    p = int(rng.integers(p_range[0], p_range[1] + 1))
    x = rng.standard_normal((n, p))
    w = rng.standard_normal(p) * (rng.random(p) < 0.5)
    y = np.where(x @ w + 0.5 * rng.standard_normal(n) >= 0, 1.0, -1.0)
    y[:2] = (1.0, -1.0)
    y[2:4] = (1.0, -1.0)
    data, _ = standardize(Dataset(x, y))
    return data


def mutual_validation(instances=50, seed=0, n_range=(10, 50), p_range=(5, 20),
                      solver_cfg=None, obj_tol=1e-6, coef_tol=1e-4, oracle_cfg=None):
    """Fit random small problems with both solvers and compare.

    Modes cycle lasso, enet, aenet.  lambda1 is drawn from {0, 0.01, 0.1,
    lambda_max / 2} and lambda2 from {0, 0.1, 1} (0 for lasso); the pair
    (0, 0) is redrawn because the unpenalized problem has no minimizer on
    separable data.  Adaptive weights come from an elastic-net fit at
    lambda_max / 4.
    """
    from .path import adaptive_weights, lambda_max
    from .solver import PenaltySpec, fit_fixed

    rng = np.random.Generator(np.random.PCG64(seed))
    modes = ("lasso", "enet", "aenet")
    records = []
    for i in range(instances):
        data = random_instance(rng, n_range, p_range)
        mode = modes[i % 3]
        lam2 = 0.0 if mode == "lasso" else float(rng.choice([0.0, 0.1, 1.0]))
        choices = ["zero", "0.01", "0.1", "half"]
        if lam2 == 0.0:
            choices = choices[1:]
        pick = choices[int(rng.integers(len(choices)))]
        lam1 = {"zero": 0.0, "0.01": 0.01, "0.1": 0.1}.get(pick, np.nan)
        note = ""
        try:
            weights = None
            if mode == "aenet":
                first = fit_fixed(data, PenaltySpec(lambda_max(data) / 4, lam2), cfg=solver_cfg)
                weights = adaptive_weights(first.beta, data.n)
            if pick == "half":
                lam1 = lambda_max(data, weights) / 2
            pen = PenaltySpec(lam1, lam2, weights)
            a = fit_fixed(data, pen, cfg=solver_cfg)
            b = oracle_fit(data, pen, oracle_cfg)
            c = compare(a, b, data, pen)
            rel, coef = c.relative_gap(), c.coef_gap
            passed = abs(rel) <= obj_tol and (lam2 == 0 or coef <= coef_tol)
        except NonConvergenceError as exc:
            rel, coef, passed, note = np.nan, np.nan, False, str(exc)
        records.append(BatteryRecord(i, data.n, data.p, mode, lam1, lam2, rel, coef, passed, note))
    return records
