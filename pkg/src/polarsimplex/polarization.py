"""Numerical maximization of ``P_f(w) = min_x p_f(x, w)`` over configurations.

Each start runs a trust-region exchange ascent. A pool of inner local
minimizers ``x_k`` is tracked with damped Newton steps, and one SLSQP solve
maximizes ``tau`` subject to ``p_f(x_k(w), w) >= tau`` inside a box around
the current points (envelope gradients give the constraint Jacobian). The
step is kept only if the independent global engine confirms that ``P_f``
increased; otherwise the engine's minimizers join the pool and the box
shrinks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidParameterError
from .extended import ExtendedReal
from .geometry import (
    Configuration,
    geodesic_perturb,
    random_hemisphere_configuration,
    random_orthogonal,
    random_sphere_points,
    regular_simplex,
)
from .kernels import Kernel, classify_kernel
from .manifold import normalize_rows, sphere_descent, tangent
from .potential import (
    SolverOptions,
    min_potential,
    newton_polish,
    potential_and_gradient,
    simplex_extrema_closed_form,
)

TR_INIT = 0.1
TR_MAX = 0.25
TR_GAIN_RTOL = 1e-15
MAX_ROUNDS = 60
POOL_CAP = 4
SLSQP_ITERS = 60
PERTURB_ANGLE = 0.2
POOL_DEDUPE = 1e-6
DEFAULT_STARTS = 20


@dataclass
class PolarizationResult:
    best_value: ExtendedReal
    best_config: Configuration
    gap_to_simplex: float
    trace: list = field(default_factory=list)  # running best after each outer step
    starts_used: int = 0
    start_values: list = field(default_factory=list)  # final P_f of every start
    start_kinds: list = field(default_factory=list)

    def to_json(self):
        return {
            "best_value": self.best_value.to_json(),
            "best_config": self.best_config.to_json(),
            "gap_to_simplex": self.gap_to_simplex,
            "trace": self.trace,
            "starts_used": self.starts_used,
            "start_values": self.start_values,
            "start_kinds": self.start_kinds,
        }


# --- inner problem -----------------------------------------------------------------


class _InnerPool:
    """Local minimizers of ``p_f(., w)``, re-solved from fixed seeds."""

    def __init__(self, k: Kernel, points: np.ndarray):
        self.k = k
        self.x = np.array(points, dtype=float).reshape(-1, np.shape(points)[-1])

    def solve(self, v: np.ndarray):
        """Minimizers and values reached from the seeds; the seeds are untouched."""
        x, vals, ok = newton_polish(self.k, v, self.x)
        if not ok.all():
            res = sphere_descent(
                lambda xs: potential_and_gradient(self.k, v, xs), x[~ok], tol=1e-9, max_iter=60
            )
            x[~ok], vals[~ok], _ = newton_polish(self.k, v, res.points)
        return x, vals

    def reseed(self, v: np.ndarray, extra=None):
        """Move the seeds to the minimizers at ``v``, merging ``extra`` and deduplicating."""
        if extra is not None:
            self.x = np.vstack([self.x, extra])
        x, vals = self.solve(v)
        order = np.argsort(vals)
        keep = []
        for i in order:
            if np.isfinite(vals[i]) and all(
                np.linalg.norm(x[i] - x[j]) > POOL_DEDUPE for j in keep
            ):
                keep.append(i)
        keep = keep[: POOL_CAP * v.shape[0]]
        self.x = x[keep]
        return vals[keep]


def _config_gradients(k: Kernel, v: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Tangent gradients of ``p_f(x_k, w)`` in each ``v_i``; shape ``(m, d+1, d)``."""
    t = np.clip(2.0 - 2.0 * xs @ v.T, 0.0, 4.0)
    fp = np.asarray(k.deriv(t), dtype=float)  # (m, d+1)
    g = -2.0 * fp[:, :, None] * xs[:, None, :]
    return tangent(v[None, :, :], g)


def _global_check(k, v, seed, d):
    opts = SolverOptions(starts=10 * d, use_grid=False, seed=seed)
    return min_potential(k, Configuration(v), opts)


# --- one start ---------------------------------------------------------------------


def _epigraph_step(k, v, pool, radius):
    """Maximize ``tau`` s.t. ``phi_k(w) >= tau`` with ``w`` in a box around ``v``."""
    n, d = v.shape
    cache = {}

    def inner(z):
        key = z.tobytes()
        if key not in cache:
            y = z[:-1].reshape(n, d)
            norms = np.linalg.norm(y, axis=1, keepdims=True)
            vv = y / norms
            x, vals = pool.solve(vv)
            g = _config_gradients(k, vv, x) / norms[None, :, :]
            cache.clear()
            cache[key] = (vals, g.reshape(len(vals), -1))
        return cache[key]

    def cons(z):
        vals, _ = inner(z)
        return vals - z[-1]

    def cons_jac(z):
        vals, g = inner(z)
        return np.hstack([g, -np.ones((len(vals), 1))])

    vals0, _ = inner(np.concatenate([v.ravel(), [0.0]]))
    tau0 = float(vals0.min())
    z0 = np.concatenate([v.ravel(), [tau0]])
    bounds = [(c - radius, c + radius) for c in v.ravel()] + [(None, None)]
    objective_jac = np.zeros(z0.size)
    objective_jac[-1] = -1.0
    with np.errstate(all="ignore"), warnings.catch_warnings():
        # SLSQP clips its own line-search trials to the box and warns about it
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            lambda z: -z[-1],
            z0,
            jac=lambda z: objective_jac,
            bounds=bounds,
            constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
            method="SLSQP",
            options={"maxiter": SLSQP_ITERS, "ftol": 1e-15},
        )
    if not np.all(np.isfinite(res.x)):
        return v
    return normalize_rows(res.x[:-1].reshape(n, d))


def _run_start(k, v0, tol, seed, trace):
    """Trust-region exchange: a step counts only if the global engine confirms it."""
    d = v0.shape[1]
    v = v0
    ext = _global_check(k, v, seed, d)
    value = float(ext.value)
    pool = _InnerPool(k, ext.points)
    pool.reseed(v)
    radius = TR_INIT
    for rnd in range(MAX_ROUNDS):
        v_new = _epigraph_step(k, v, pool, radius)
        ext = _global_check(k, v_new, seed + rnd + 1, d)
        new_value = float(ext.value)
        move = float(np.max(np.abs(v_new - v)))
        if new_value > value:
            gain = new_value - value
            v, value = v_new, new_value
            pool.reseed(v, ext.points)
            trace.append(value)
            radius = min(TR_MAX, max(2.0 * move, radius))
            if gain <= TR_GAIN_RTOL * (1.0 + abs(value)) and move <= tol:
                break
        else:
            # the pool missed a minimizer that became global: learn it, shrink
            pool.reseed(v, ext.points)
            radius = 0.25 * min(radius, max(move, tol))
            if radius < tol:
                break
    return v, value


def _start_configurations(d: int, n: int, rng: np.random.Generator):
    star = regular_simplex(d).points
    out = []
    for i in range(n):
        kind = ("random", "perturbed", "hemisphere")[i % 3]
        if kind == "random":
            pts = random_sphere_points(rng, d + 1, d)
        elif kind == "perturbed":
            rot = random_orthogonal(rng, d)
            pts = geodesic_perturb(star @ rot.T, rng, PERTURB_ANGLE)
        else:
            pts = random_hemisphere_configuration(rng, d).points
        out.append((kind, normalize_rows(pts)))
    return out


def simplex_value(k: Kernel, d: int) -> float:
    """``P_f`` of the regular simplex: closed form when proven, else the engine."""
    ext = simplex_extrema_closed_form(k, d, classify_kernel(k))
    if ext.minimum.certified:
        return float(ext.minimum.value)
    return float(min_potential(k, regular_simplex(d)).value)


def maximize_polarization(
    k: Kernel, d: int, opts: Optional[SolverOptions] = None
) -> PolarizationResult:
    """Multistart search for the configuration maximizing ``P_f``.

    ``opts.starts`` sets the number of outer starts (default 20), cycling
    through random, perturbed-simplex and hemisphere configurations.
    """
    d = int(d)
    if d < 2:
        raise InvalidParameterError("d must be >= 2")
    opts = opts or SolverOptions()
    n_starts = DEFAULT_STARTS if opts.starts is None else int(opts.starts)
    if n_starts < 1:
        raise InvalidParameterError("need at least one start")
    rng = np.random.default_rng(opts.seed)
    trace = []
    best_v, best_val = None, -np.inf
    values, kinds = [], []
    for i, (kind, v0) in enumerate(_start_configurations(d, n_starts, rng)):
        v, val = _run_start(k, v0, max(opts.tol, 1e-12), opts.seed + 7919 * i, trace)
        values.append(val)
        kinds.append(kind)
        if val > best_val:
            best_v, best_val = v, val
        trace.append(best_val)
    best_cfg = Configuration(best_v)
    final = min_potential(k, best_cfg, SolverOptions(seed=opts.seed, grid_res=opts.grid_res))
    return PolarizationResult(
        best_value=final.value,
        best_config=best_cfg,
        gap_to_simplex=float(final.value) - simplex_value(k, d),
        trace=[float(t) for t in trace],
        starts_used=n_starts,
        start_values=values,
        start_kinds=kinds,
    )


def hemisphere_bound(k: Kernel, d: int) -> ExtendedReal:
    """``min{f(4) + d f(2 - 2/d), f(0) + d f(2 + 2/d)}``.

    Bounds ``P_f`` for configurations whose simplex does not contain the
    origin in its interior, when ``f`` is nonincreasing and convex.
    """
    d = int(d)
    if d < 2:
        raise InvalidParameterError("d must be >= 2")
    first = k.eval(4.0) + d * k.eval(2.0 - 2.0 / d)
    second = k.eval(0.0) + d * k.eval(2.0 + 2.0 / d)
    return min(first, second)
