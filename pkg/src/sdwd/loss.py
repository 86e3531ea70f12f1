"""DWD loss, its derivative, and the soft-thresholding operator.

The loss is

    V(u) = 1 - u         for u <= 1/2
    V(u) = 1 / (4u)      for u >  1/2

It is convex, continuously differentiable, and V' is Lipschitz with
constant 4.  The quadratic coefficient 2 = 4/2 gives a global majorizer
of V at any expansion point, which is what makes the coordinate update
closed-form.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MajorizationConstants:
    lipschitz: float = 4.0
    quad_coeff: float = 2.0

    def __post_init__(self):
        if not (self.lipschitz > 0 and self.quad_coeff > 0):
            raise ValueError("majorization constants must be positive")
        if self.quad_coeff != self.lipschitz / 2:
            raise ValueError("quad_coeff must equal lipschitz / 2")


MAJORIZATION = MajorizationConstants()


def _check_finite(u):
    arr = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("margin must be finite")
    return arr


def _unwrap(arr):
    return float(arr) if arr.ndim == 0 else arr


def dwd_loss(u):
    """Evaluate V(u); accepts a scalar or an array."""
    u = _check_finite(u)
    # np.where evaluates both branches; keep the 1/(4u) branch away from 0
    safe = np.where(u > 0.5, u, 1.0)
    return _unwrap(np.where(u <= 0.5, 1.0 - u, 0.25 / safe))


def dwd_loss_deriv(u):
    """Evaluate V'(u); values lie in [-1, 0)."""
    u = _check_finite(u)
    safe = np.where(u > 0.5, u, 1.0)
    return _unwrap(np.where(u <= 0.5, -1.0, -0.25 / (safe * safe)))


def soft_threshold(z, r):
    """sign(z) * max(|z| - r, 0)."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("threshold must be nonnegative")
    z = np.asarray(z, dtype=np.float64)
    return _unwrap(np.sign(z) * np.maximum(np.abs(z) - r, 0.0))
