"""Majorized cyclic coordinate descent for one fixed penalty.

Each coordinate minimizes a quadratic upper bound of the objective:

    beta_j <- S(4*beta_j - g_j, lambda1 * w_j) / (4 + lambda2)

with g_j = (1/n) sum_i V'(u_i) y_i x_ij.  The intercept takes the
unpenalized step beta0 <- beta0 - (1/(4n)) sum_i V'(u_i) y_i.  Margins
u_i = y_i (beta0 + x_i' beta) are kept in a cache and updated incrementally.
The bound is valid because every column of a standardized design has
(1/n) sum_i x_ij^2 = 1.

The compiled solver can replace the constant 4 by a curvature bound that
only holds on a small interval around the current value (``curvature =
"adaptive"``); a step is kept only if it lands inside that interval, so the
quadratic still majorizes along the move and every update still descends.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NonConvergenceError
from .loss import MAJORIZATION, dwd_loss, dwd_loss_deriv, soft_threshold


@dataclass(frozen=True, eq=False)
class PenaltySpec:
    """lambda1 * sum w_j |b_j| + (lambda2 / 2) * sum b_j^2."""
    lambda1: float
    lambda2: float = 0.0
    weights: np.ndarray | None = None

    def __post_init__(self):
        if not (np.isfinite(self.lambda1) and self.lambda1 >= 0):
            raise ValueError(f"lambda1 must be finite and >= 0, got {self.lambda1}")
        if not (np.isfinite(self.lambda2) and self.lambda2 >= 0):
            raise ValueError(f"lambda2 must be finite and >= 0, got {self.lambda2}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if not np.all(np.isfinite(w) & (w > 0)):
                raise ValueError("penalty weights must be positive and finite")
            object.__setattr__(self, "weights", w)

    def weights_for(self, p):
        if self.weights is None:
            return np.ones(p)
        if self.weights.shape != (p,):
            raise ValueError(f"weights have shape {self.weights.shape}, expected ({p},)")
        return self.weights

    def thresholds(self, p):
        return self.lambda1 * self.weights_for(p)

    def value(self, beta):
        w = self.weights_for(beta.shape[0])
        return float(self.lambda1 * np.dot(w, np.abs(beta)) + 0.5 * self.lambda2 * np.dot(beta, beta))


@dataclass(eq=False)
class FitState:
    beta0: float
    beta: np.ndarray
    margins: np.ndarray
    cycles: int = 0
    trace: tuple | None = None      # (objectives, moves) when recorded

    @classmethod
    def zeros(cls, data):
        return cls(0.0, np.zeros(data.p), np.zeros(data.n))

    @classmethod
    def from_coefficients(cls, data, beta0, beta):
        beta = np.array(beta, dtype=np.float64)
        return cls(float(beta0), beta, compute_margins(data, beta0, beta))

    def copy(self):
        return FitState(self.beta0, self.beta.copy(), self.margins.copy(), self.cycles)

    def refresh(self, data):
        self.margins = compute_margins(data, self.beta0, self.beta)


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and loop options.

    Convergence requires max_j 4*(delta_j)^2 < ``tol`` over a full pass
    (intercept included) and every KKT residual of the working set below
    ``kkt_tol``; set ``kkt_tol`` to 0 to use the step rule alone.
    ``curvature`` is "adaptive" (interval-local bound, falling back to 4)
    or "global" (always 4).  ``update_constant`` is the multiplier of the
    current coefficient in the global update and exists only for
    fault-injection tests.
    """
    tol: float = 1e-8
    max_cycles: int = 100_000
    active_set: bool = True
    kkt_tol: float = 1e-6
    curvature: str = "adaptive"
    update_constant: float = MAJORIZATION.lipschitz

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")
        if self.curvature not in ("adaptive", "global"):
            raise ValueError(f"unknown curvature mode {self.curvature!r}")


def compute_margins(data, beta0, beta):
    return data.y * (beta0 + data.x @ beta)


def _check_index(data, j):
    if not 0 <= j < data.p:
        raise IndexError(f"feature index {j} out of range for p={data.p}")


def coordinate_gradient(state, data, j):
    _check_index(data, j)
    return float(np.mean(dwd_loss_deriv(state.margins) * data.y * data.x[:, j]))


def intercept_gradient(state, data):
    return float(np.mean(dwd_loss_deriv(state.margins) * data.y))


def update_coefficient(state, data, pen, j):
    """Apply the closed-form majorizer update to coordinate ``j`` in place."""
    g = coordinate_gradient(state, data, j)
    w = pen.weights_for(data.p)[j]
    lip = MAJORIZATION.lipschitz
    old = state.beta[j]
    new = soft_threshold(lip * old - g, pen.lambda1 * w) / (lip + pen.lambda2)
    if new != old:
        state.margins += data.y * data.x[:, j] * (new - old)
        state.beta[j] = new
    return new


def update_intercept(state, data):
    old = state.beta0
    new = old - intercept_gradient(state, data) / MAJORIZATION.lipschitz
    if new != old:
        state.margins += data.y * (new - old)
        state.beta0 = new
    return new


def objective(state, data, pen):
    return float(np.mean(dwd_loss(state.margins)) + pen.value(state.beta))


def kkt_residuals(state, data, pen):
    """Per-coordinate violation of the optimality conditions (0 when satisfied)."""
    g = data.x.T @ (dwd_loss_deriv(state.margins) * data.y) / data.n
    t = pen.thresholds(data.p)
    b = state.beta
    active = np.abs(g + t * np.sign(b) + pen.lambda2 * b)
    inactive = np.maximum(0.0, np.abs(g) - t)
    return np.where(b != 0, active, inactive)


def check_standardized(data, slack=1e-8):
    ms = np.mean(data.x ** 2, axis=0)
    if np.any(ms > 1.0 + slack):
        raise ValueError("columns must satisfy (1/n) sum x_ij^2 <= 1; standardize the data first")


class _Problem:
    """Solver-ready arrays derived from a standardized dataset."""

    def __init__(self, data):
        self.data = data
        self.y = np.ascontiguousarray(data.y)
        self.xy = np.asfortranarray(data.x * data.y[:, None])

    def gradients(self, margins):
        return self.xy.T @ dwd_loss_deriv(margins) / self.data.n

    def solve(self, state, thresh, lambda2, working, cfg, trace_capacity=0):
        """Run the compiled loop on ``state`` in place; raises on the cycle cap."""
        working = np.ascontiguousarray(working, dtype=np.int64)
        thresh = np.ascontiguousarray(thresh, dtype=np.float64)
        pen = np.array([float(thresh @ np.abs(state.beta) + 0.5 * lambda2 * state.beta @ state.beta)])
        trace_obj = np.empty(trace_capacity)
        trace_move = np.empty(trace_capacity)
        tc = np.zeros(1, dtype=np.int64)
        beta0, cycles, ok = _kernels.cd_fit(
            self.xy, self.y, state.beta, state.margins, float(state.beta0), thresh,
            float(lambda2), working, cfg.tol, cfg.kkt_tol, cfg.max_cycles, cfg.active_set,
            cfg.curvature == "adaptive", cfg.update_constant, pen, trace_obj, trace_move, tc)
        state.beta0 = beta0
        state.cycles += cycles
        if trace_capacity:
            state.trace = (trace_obj[:tc[0]].copy(), trace_move[:tc[0]].copy())
        if not ok:
            raise NonConvergenceError(
                f"coordinate descent did not converge within {cfg.max_cycles} cycles", state)
        return state


def fit_fixed(data, pen, init=None, cfg=None, working=None, trace_capacity=0):
    """Minimize the penalized DWD objective at one (lambda1, lambda2, weights).

    ``working`` restricts the coordinates that may move; the rest keep their
    initial values.  Without ``init`` the fit starts from the intercept-only
    solution.  Returns a new FitState; ``init`` is not modified.  With
    ``trace_capacity > 0`` the objective after each of the first that many
    single-coordinate updates is stored in ``state.trace``.
    """
    cfg = cfg or SolverConfig()
    check_standardized(data)
    prob = _Problem(data)
    if init is None:
        # cold start from the intercept-only fit; above lambda_max this is exact
        state = FitState.zeros(data)
        prob.solve(state, np.zeros(data.p), 0.0, np.empty(0, dtype=np.int64), cfg)
    else:
        state = init.copy()
    state.cycles = 0
    if working is None:
        working = np.arange(data.p)
    return prob.solve(state, pen.thresholds(data.p), pen.lambda2, working, cfg, trace_capacity)


def _loss_change(u, delta):
    """V(u + delta) - V(u) elementwise without cancellation."""
    v = u + delta
    out = np.empty_like(u)
    lo, hi = u <= 0.5, v <= 0.5
    both_lin = lo & hi
    both_inv = ~lo & ~hi
    up = lo & ~hi               # crosses 1/2 upwards
    down = ~lo & hi
    out[both_lin] = -delta[both_lin]
    out[both_inv] = -0.25 * delta[both_inv] / (u[both_inv] * v[both_inv])
    out[up] = ((u[up] - 0.5) ** 2 - delta[up] * (1.0 - u[up])) / v[up]
    out[down] = -((v[down] - 0.5) ** 2 + delta[down] * (1.0 - v[down])) / u[down]
    return out


def objective_change(margins, col, old, new, thresh=0.0, lambda2=0.0):
    """Exact-as-possible objective increment when one coefficient moves old -> new.

    ``col`` is y * x_j (or y for the intercept).  Terms are formed without
    cancellation and summed with ``math.fsum``, so the sign is reliable even
    for moves far below the objective's own rounding error.
    """
    d = new - old
    if d == 0.0:
        return 0.0
    terms = _loss_change(margins, col * d) / margins.shape[0]
    # |new| - |old| is exact for nearby values, so no large products cancel
    pen = [thresh * (abs(new) - abs(old)), 0.5 * lambda2 * d * (new + old)]
    return math.fsum(np.concatenate([terms, pen]))


def trace_fit(data, pen, init=None, curvature="global", max_cycles=100_000, tol=1e-8):
    """Full cyclic passes that record every single coordinate/intercept update.

    ``curvature="global"`` applies the closed-form update above through the
    Python functions; ``"adaptive"`` calls the compiled step of the fast
    solver.  Returns the final state and a list of (objective, |move|,
    increment) tuples, where increment comes from :func:`objective_change`.
    """
    if curvature not in ("global", "adaptive"):
        raise ValueError(f"unknown curvature mode {curvature!r}")
    check_standardized(data)
    state = FitState.zeros(data) if init is None else init.copy()
    prob = _Problem(data)
    thresh = pen.thresholds(data.p)
    radius = np.ones(data.p + 1)
    lip = MAJORIZATION.lipschitz
    trace = []

    def step(j):
        col = prob.xy[:, j] if j < data.p else prob.y
        old = state.beta[j] if j < data.p else state.beta0
        t = thresh[j] if j < data.p else 0.0
        l2 = pen.lambda2 if j < data.p else 0.0
        if curvature == "adaptive":
            new = _kernels.coord_step(col, state.margins, old, t, l2, radius, j, True, lip)
        elif j < data.p:
            new = soft_threshold(lip * old - coordinate_gradient(state, data, j), t) / (lip + l2)
        else:
            new = old - intercept_gradient(state, data) / lip
        inc = objective_change(state.margins, col, old, new, t, l2)
        if new != old:
            state.margins += col * (new - old)
            if j < data.p:
                state.beta[j] = new
            else:
                state.beta0 = new
        trace.append((objective(state, data, pen), abs(new - old), inc))
        return lip * (new - old) ** 2

    for _ in range(max_cycles):
        dmax = max(step(j) for j in range(data.p + 1))
        state.cycles += 1
        if dmax < tol:
            break
    return state, trace


__all__ = [
    "PenaltySpec", "FitState", "SolverConfig", "coordinate_gradient",
    "intercept_gradient", "update_coefficient", "update_intercept", "fit_fixed",
    "objective", "objective_change", "kkt_residuals", "compute_margins", "trace_fit",
]
