"""Compiled inner loops for the coordinate descent.

Arrays: ``xy`` is Fortran-ordered with ``xy[i, j] = y_i * x_ij``; ``u`` holds
the margins and is updated in place together with ``beta``.  Index ``p`` of
``radius`` belongs to the intercept.

Two curvature modes for the quadratic majorizer of one coordinate:

* global: the constant 4 (sup of V'') valid everywhere for unit mean-square
  columns;
* adaptive: sup of (1/n) sum a_i^2 V''(u_i + a_i t) over |t| <= r, accepted
  only if the resulting step stays inside the radius r, so the quadratic is
  still an upper bound along the segment; otherwise the global constant.
"""
import numpy as np
from numba import njit

CURVATURE = 4.0
MIN_CURVATURE = 1e-12
MIN_RADIUS = 1e-12
RADIUS_TRIES = 4


@njit(cache=True, nogil=True)
def _vprime(ui):
    if ui <= 0.5:
        return -1.0
    return -0.25 / (ui * ui)


@njit(cache=True, nogil=True)
def _v(ui):
    if ui <= 0.5:
        return 1.0 - ui
    return 0.25 / ui


@njit(cache=True, nogil=True)
def col_grad(col, u):
    n = u.shape[0]
    s = 0.0
    for i in range(n):
        s += _vprime(u[i]) * col[i]
    return s / n


@njit(cache=True, nogil=True)
def local_curvature(col, u, r):
    n = u.shape[0]
    s = 0.0
    for i in range(n):
        a = col[i]
        reach = abs(a) * r
        if u[i] + reach <= 0.5:
            continue
        lo = u[i] - reach
        if lo > 0.5:
            s += a * a * (0.5 / (lo * lo * lo))
        else:
            s += a * a * CURVATURE
    return s / n


@njit(cache=True, nogil=True)
def _shrink(z, t, denom):
    if z > t:
        return (z - t) / denom
    if z < -t:
        return (z + t) / denom
    return 0.0


@njit(cache=True, nogil=True)
def coord_step(col, u, b, thresh, lam2, radius, k, adaptive, m_update):
    """New value of one coefficient (or the intercept with thresh = lam2 = 0)."""
    g = col_grad(col, u)
    if adaptive:
        r = radius[k]
        for _ in range(RADIUS_TRIES):
            h = local_curvature(col, u, r)
            if h < MIN_CURVATURE:
                h = MIN_CURVATURE
            new = _shrink(h * b - g, thresh, h + lam2)
            d = abs(new - b)
            if d <= r:
                if d > 0.0:
                    radius[k] = max(2.0 * d, MIN_RADIUS)
                return new
            r = 2.0 * d
        radius[k] = r
    return _shrink(m_update * b - g, thresh, CURVATURE + lam2)


@njit(cache=True, nogil=True)
def _record(u, pen, d, trace_obj, trace_move, tc):
    c = tc[0]
    if c < trace_obj.shape[0]:
        n = u.shape[0]
        s = 0.0
        for i in range(n):
            s += _v(u[i])
        trace_obj[c] = s / n + pen[0]
        trace_move[c] = abs(d)
        tc[0] = c + 1


@njit(cache=True, nogil=True)
def sweep(xy, y, beta, u, beta0, thresh, lam2, idx, radius, adaptive, m_update,
          pen, trace_obj, trace_move, tc):
    """One cycle over ``idx`` followed by the intercept; returns (beta0, max 4*delta^2)."""
    n = u.shape[0]
    p = beta.shape[0]
    tracing = trace_obj.shape[0] > 0
    dmax = 0.0
    for k in range(idx.shape[0]):
        j = idx[k]
        col = xy[:, j]
        old = beta[j]
        new = coord_step(col, u, old, thresh[j], lam2, radius, j, adaptive, m_update)
        d = new - old
        if d != 0.0:
            beta[j] = new
            for i in range(n):
                u[i] += col[i] * d
            if CURVATURE * d * d > dmax:
                dmax = CURVATURE * d * d
            pen[0] += thresh[j] * (abs(new) - abs(old)) + 0.5 * lam2 * (new * new - old * old)
        if tracing:
            _record(u, pen, d, trace_obj, trace_move, tc)
    new0 = coord_step(y, u, beta0, 0.0, 0.0, radius, p, adaptive, CURVATURE)
    d0 = new0 - beta0
    if d0 != 0.0:
        beta0 = new0
        for i in range(n):
            u[i] += y[i] * d0
        if CURVATURE * d0 * d0 > dmax:
            dmax = CURVATURE * d0 * d0
    if tracing:
        _record(u, pen, d0, trace_obj, trace_move, tc)
    return beta0, dmax


@njit(cache=True, nogil=True)
def kkt_ok(xy, y, beta, u, thresh, lam2, idx, kkt_tol):
    if abs(col_grad(y, u)) > kkt_tol:
        return False
    for k in range(idx.shape[0]):
        j = idx[k]
        g = col_grad(xy[:, j], u)
        b = beta[j]
        if b > 0.0:
            r = abs(g + thresh[j] + lam2 * b)
        elif b < 0.0:
            r = abs(g - thresh[j] + lam2 * b)
        else:
            r = abs(g) - thresh[j]
        if r > kkt_tol:
            return False
    return True


@njit(cache=True, nogil=True)
def cd_fit(xy, y, beta, u, beta0, thresh, lam2, working, tol, kkt_tol,
           max_cycles, active_set, adaptive, m_update, pen, trace_obj, trace_move, tc):
    """Cyclic descent over ``working`` with the active-set refinement.

    Returns (beta0, cycles, converged).
    """
    p = beta.shape[0]
    radius = np.ones(p + 1)
    cycles = 0
    while cycles < max_cycles:
        beta0, dmax = sweep(xy, y, beta, u, beta0, thresh, lam2, working, radius,
                            adaptive, m_update, pen, trace_obj, trace_move, tc)
        cycles += 1
        if dmax < tol:
            if kkt_tol <= 0.0 or kkt_ok(xy, y, beta, u, thresh, lam2, working, kkt_tol):
                return beta0, cycles, True
        if active_set:
            nact = 0
            for k in range(working.shape[0]):
                if beta[working[k]] != 0.0:
                    nact += 1
            active = np.empty(nact, dtype=working.dtype)
            nact = 0
            for k in range(working.shape[0]):
                if beta[working[k]] != 0.0:
                    active[nact] = working[k]
                    nact += 1
            while cycles < max_cycles:
                beta0, dmax = sweep(xy, y, beta, u, beta0, thresh, lam2, active, radius,
                                    adaptive, m_update, pen, trace_obj, trace_move, tc)
                cycles += 1
                if dmax < tol:
                    break
    return beta0, cycles, False
