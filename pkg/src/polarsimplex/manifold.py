"""Batched Riemannian gradient descent on the unit sphere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARMIJO = 0.3
FLAT_RTOL = 1e-13
MIN_MOVE = 1e-16


@dataclass
class DescentResult:
    points: np.ndarray
    values: np.ndarray
    grad_norms: np.ndarray
    converged: np.ndarray  # tangent gradient below tol
    stalled: np.ndarray  # line search cannot make progress (roundoff floor or cusp)
    iterations: int
    evaluations: int


def tangent(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return g - np.sum(g * x, axis=-1, keepdims=True) * x


def normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def sphere_descent(
    value_grad,
    x0: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 500,
    first_move: float = 0.1,
    shrink: float = 0.5,
) -> DescentResult:
    """Minimize independently from every row of ``x0``.

    ``value_grad(X)`` returns ``(values, euclidean_gradients)`` for a stack of
    points. Steps follow the negative tangent gradient and are retracted by
    renormalization; each row runs its own backtracking line search. A step is
    accepted on Armijo decrease, or, once values agree to roundoff, when it
    shrinks the tangent gradient.
    """
    x = normalize_rows(np.array(x0, dtype=float))
    m = x.shape[0]
    f, g = value_grad(x)
    evals = m
    t = tangent(x, g)
    gn = np.linalg.norm(t, axis=1)
    bad = ~(np.isfinite(f) & np.isfinite(gn))
    alpha = np.where(gn > 0, first_move / np.maximum(gn, 1e-300), 0.0)
    converged = gn <= tol
    stalled = bad.copy()
    it = 0
    for it in range(1, max_iter + 1):
        active = ~(converged | stalled)
        if not active.any():
            it -= 1
            break
        idx = np.flatnonzero(active)
        pending = np.ones(idx.size, dtype=bool)
        while pending.any():
            rows = idx[pending]
            trial = normalize_rows(x[rows] - alpha[rows, None] * t[rows])
            ft, gt = value_grad(trial)
            evals += rows.size
            tt = tangent(trial, gt)
            gnt = np.linalg.norm(tt, axis=1)
            ok_vals = np.isfinite(ft) & np.isfinite(gnt)
            noise = FLAT_RTOL * (1.0 + np.abs(f[rows]))
            # below the noise floor a value decrease is meaningless; use the gradient
            armijo = (ft <= f[rows] - ARMIJO * alpha[rows] * gn[rows] ** 2) & (f[rows] - ft > noise)
            flat = (np.abs(ft - f[rows]) <= noise) & (gnt < gn[rows])
            accept = ok_vals & (armijo | flat)
            acc_rows = rows[accept]
            x[acc_rows] = trial[accept]
            f[acc_rows] = ft[accept]
            t[acc_rows] = tt[accept]
            gn[acc_rows] = gnt[accept]
            alpha[acc_rows] *= 2.0
            rej_rows = rows[~accept]
            alpha[rej_rows] *= shrink
            dead = alpha[rows] * gn[rows] < MIN_MOVE
            stalled[rows[~accept & dead]] = True
            retry = pending.copy()
            retry[pending] = ~accept & ~dead
            pending = retry
        converged |= gn <= tol
    return DescentResult(
        points=x,
        values=f,
        grad_norms=gn,
        converged=converged,
        stalled=stalled & ~converged,
        iterations=it,
        evaluations=evals,
    )
