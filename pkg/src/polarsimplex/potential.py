"""The potential ``p_f(x, w) = sum_i f(|x - v_i|**2)`` and its extrema on the sphere.

:func:`min_potential` and :func:`max_potential` are independent numerical
solvers (candidates + multistart descent + grid for ``d <= 3``). The closed
forms for the regular simplex live in separate functions so the two routes
can be compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameterError
from .extended import ExtendedReal, esum
from .geometry import Configuration, geodesic_perturb, random_sphere_points, simplex_geometry
from .kernels import Kernel, classify_kernel
from .manifold import normalize_rows, sphere_descent, tangent

NEAR_OPT_RTOL = 1e-9
DEDUPE_DIST = 1e-4
VERTEX_NUDGE = 1e-6
USABLE_GRAD = 1e-6
GRID_STARTS = 4
POLISH_FROM = 1e-2
NEWTON_FD = 1e-5
NEWTON_TOL = 1e-13


@dataclass
class SolverOptions:
    starts: Optional[int] = None  # default 50 * d
    tol: float = 1e-10
    max_iter: int = 500
    grid_res: Optional[int] = None  # default 1e4 on S^1, 1e6 on S^2
    use_grid: bool = True
    seed: int = 0

    def n_starts(self, d: int) -> int:
        return 50 * d if self.starts is None else int(self.starts)

    def to_json(self):
        return {
            "starts": self.starts,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "grid_res": self.grid_res,
            "use_grid": self.use_grid,
            "seed": self.seed,
        }


@dataclass
class PotentialExtremum:
    value: ExtendedReal
    points: np.ndarray  # all detected optimizers, one per row
    method: str  # closed_form | candidate_set | grid | multistart
    certificate: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "value": self.value.to_json(),
            "points": self.points.tolist(),
            "method": self.method,
            "certificate": self.certificate,
        }


def squared_distances(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``|x - v|**2 = 2 - 2 x.v`` for unit vectors, clipped to ``[0, 4]``."""
    return np.clip(2.0 - 2.0 * (np.atleast_2d(x) @ points.T), 0.0, 4.0)


def point_potential(k: Kernel, cfg: Configuration, x) -> ExtendedReal:
    x = np.asarray(x, dtype=float)
    if x.shape != (cfg.dim,):
        raise InvalidParameterError("x has the wrong dimension")
    t = squared_distances(cfg.points, x)[0]
    return esum(k.eval(ti) for ti in t)


def potential_values(k: Kernel, cfg: Configuration, xs) -> np.ndarray:
    """Vectorized potential at the rows of ``xs`` (``+inf`` where a term is)."""
    return k.values(squared_distances(cfg.points, xs)).sum(axis=1)


def potential_and_gradient(k: Kernel, points: np.ndarray, xs: np.ndarray, sign: float = 1.0):
    """Values and Euclidean gradients (in ``x``) of ``sign * p_f``."""
    t = squared_distances(points, xs)
    vals = k.values(t).sum(axis=1)
    with np.errstate(invalid="ignore"):
        fp = np.asarray(k.deriv(t), dtype=float)
        grads = -2.0 * fp @ points
    return sign * vals, sign * grads


def _second_deriv(k: Kernel, t: np.ndarray) -> np.ndarray:
    h = NEWTON_FD * np.maximum(t, 1e-3)
    return (np.asarray(k.deriv(t + h)) - np.asarray(k.deriv(t - h))) / (2.0 * h)


def newton_polish(k: Kernel, v: np.ndarray, xs: np.ndarray, sign: float = 1.0, iters: int = 40):
    """Damped Riemannian Newton polish of local minimizers of ``sign * p_f(., w)``.

    The tangent Hessian is shifted to be positive definite and each row keeps
    its own damping factor, so every accepted step descends. Returns the
    points, their values and a per-row convergence flag.
    """
    x = np.array(xs, dtype=float)
    m, d = x.shape
    eye = np.eye(d)
    damp = np.ones(m)
    vals, grad = potential_and_gradient(k, v, x, sign)
    live = np.isfinite(vals)
    for _ in range(iters):
        tg = tangent(x, grad)
        gn = np.linalg.norm(tg, axis=1)
        todo = live & (gn > NEWTON_TOL * (1.0 + np.abs(vals))) & (damp > 1e-12)
        if not todo.any():
            break
        rows = np.flatnonzero(todo)
        xr = x[rows]
        t = np.clip(2.0 - 2.0 * xr @ v.T, 0.0, 4.0)
        with np.errstate(all="ignore"):
            hess = 4.0 * sign * np.einsum("mi,ia,ib->mab", _second_deriv(k, t), v, v)
        proj = eye - xr[:, :, None] * xr[:, None, :]
        lam = np.sum(grad[rows] * xr, axis=1)
        mat = proj @ hess @ proj - lam[:, None, None] * proj
        finite = np.all(np.isfinite(mat), axis=(1, 2))
        mat[~finite] = proj[~finite]
        eig = np.linalg.eigvalsh(mat)
        # eigenvalues on the tangent space: drop the one belonging to x itself
        # floored so a vanishing Hessian (affine f) still gives a solvable system
        scale = np.maximum(np.abs(eig).max(axis=1), 1e-6)
        lo = np.sort(eig, axis=1)[:, 0]
        shift = np.where(lo > 1e-8 * scale, 0.0, 1e-3 * scale - lo)
        mat = mat + shift[:, None, None] * proj + xr[:, :, None] * xr[:, None, :]
        step = -np.linalg.solve(mat, tg[rows][..., None])[..., 0] * damp[rows, None]
        trial = normalize_rows(xr + step)
        tvals, tgrad = potential_and_gradient(k, v, trial, sign)
        tgn = np.linalg.norm(tangent(trial, tgrad), axis=1)
        noise = 1e-13 * (1.0 + np.abs(vals[rows]))
        better = (tvals < vals[rows] - noise) | (
            (np.abs(tvals - vals[rows]) <= noise) & (tgn < gn[rows])
        )
        accept = np.isfinite(tvals) & better
        acc = rows[accept]
        x[acc], vals[acc], grad[acc] = trial[accept], tvals[accept], tgrad[accept]
        damp[acc] = np.minimum(1.0, 4.0 * damp[acc])
        damp[rows[~accept]] *= 0.25
    gn = np.linalg.norm(tangent(x, grad), axis=1)
    ok = live & (gn <= 1e-8 * (1.0 + np.abs(vals)))
    return x, vals, ok


# --- grids -------------------------------------------------------------------------


def circle_grid(n: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(theta), np.sin(theta)])


def fibonacci_sphere(n: int) -> np.ndarray:
    """Quasi-uniform points on ``S^2``."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def sphere_grid(d: int, n: Optional[int] = None) -> np.ndarray:
    if d == 2:
        return circle_grid(n or 10_000)
    if d == 3:
        return fibonacci_sphere(n or 1_000_000)
    raise InvalidParameterError("grids are only available for d <= 3")


def _grid_extremum(k, points, sign, n):
    grid = sphere_grid(points.shape[1], n)
    vals = np.empty(grid.shape[0])
    chunk = 200_000
    for lo in range(0, grid.shape[0], chunk):
        vals[lo : lo + chunk] = sign * k.values(
            squared_distances(points, grid[lo : lo + chunk])
        ).sum(1)
    order = np.argsort(vals)[:GRID_STARTS]
    return grid, vals, grid[order]


# --- extremization -----------------------------------------------------------------


def candidate_points(cfg: Configuration) -> np.ndarray:
    """``+-v_i`` and, when the origin is inside the simplex, ``+-w_i``."""
    pts = [cfg.points, -cfg.points]
    if cfg.general_position:
        geo = simplex_geometry(cfg)
        if geo.interior:
            pts += [geo.w, -geo.w]
    return np.vstack(pts)


def _dedupe(points: np.ndarray, dist: float = DEDUPE_DIST) -> np.ndarray:
    keep = []
    for p in points:
        if all(np.linalg.norm(p - q) > dist for q in keep):
            keep.append(p)
    return np.array(keep).reshape(-1, points.shape[1])


def _extremize(
    k: Kernel, cfg: Configuration, opts: SolverOptions, sign: float
) -> PotentialExtremum:
    opts = opts or SolverOptions()
    d = cfg.dim
    v = cfg.points
    rng = np.random.default_rng(opts.seed)

    cands = candidate_points(cfg)
    cand_vals = sign * potential_values(k, cfg, cands)
    starts = [cands, random_sphere_points(rng, opts.n_starts(d), d)]
    sources = ["candidate_set"] * cands.shape[0] + ["multistart"] * opts.n_starts(d)

    grid_best = None
    grid_n = 0
    if opts.use_grid and d <= 3:
        grid, grid_vals, grid_starts = _grid_extremum(k, v, sign, opts.grid_res)
        grid_n = grid.shape[0]
        grid_best = float(sign * grid_vals.min())
        starts.append(grid_starts)
        sources += ["grid"] * grid_starts.shape[0]
    x0 = np.vstack(starts)

    # gradients are undefined on a singular vertex; nudge such starts off it
    singular = not (k.f0.is_finite and np.isfinite(k.deriv(np.array([0.0]))[0]))
    if singular:
        near = np.max(x0 @ v.T, axis=1) >= 1.0 - 1e-15
        if near.any():
            x0[near] = geodesic_perturb(x0[near], rng, VERTEX_NUDGE)

    # first-order descent into a basin, then damped Newton to full accuracy
    res = sphere_descent(
        lambda xs: potential_and_gradient(k, v, xs, sign),
        x0,
        tol=max(opts.tol, POLISH_FROM),
        max_iter=opts.max_iter,
    )
    xs, vals, _ = newton_polish(k, v, res.points, sign)
    _, grads = potential_and_gradient(k, v, xs, sign)
    gnorm = np.linalg.norm(tangent(xs, grads), axis=1)
    # descents creeping at the roundoff floor are kept once nearly critical
    usable = (gnorm <= USABLE_GRAD) & np.isfinite(vals)
    polished = vals[usable]
    best_polished = float(polished.min()) if polished.size else np.inf

    # exact evaluations at the raw candidates also count (cusp optima stall the descent)
    all_pts = np.vstack([xs[usable], cands])
    all_vals = np.concatenate([polished, cand_vals])
    all_src = [s for s, u in zip(sources, usable) if u] + ["candidate_set"] * cands.shape[0]
    finite = np.isfinite(all_vals)
    if not finite.any():
        raise RuntimeError("no finite potential value found")
    best_i = int(np.argmin(np.where(finite, all_vals, np.inf)))
    best = float(all_vals[best_i])
    band = NEAR_OPT_RTOL * max(1.0, abs(best))
    near_opt = _dedupe(all_pts[all_vals <= best + band])

    certificate = {
        "evaluations": int(res.evaluations + cands.shape[0] + grid_n),
        "candidates": int(cands.shape[0]),
        "starts": int(opts.n_starts(d)),
        "grid_points": int(grid_n),
        "descents": int(x0.shape[0]),
        "converged": int(np.sum(gnorm <= opts.tol)),
        "stalled": int(np.sum(res.stalled & (gnorm > opts.tol))),
        "dropped": int((~usable).sum()),
        "iterations": int(res.iterations),
        "tol": opts.tol,
        "candidate_best": float(sign * np.min(cand_vals)),
        "grid_best": grid_best,
        "polished_best": float(sign * best_polished),
    }
    return PotentialExtremum(
        value=ExtendedReal(sign * best),
        points=near_opt,
        method=all_src[best_i],
        certificate=certificate,
    )


def min_potential(k: Kernel, cfg: Configuration, opts: Optional[SolverOptions] = None):
    """Global minimum of ``p_f(., cfg)`` over the sphere, by numerical search only."""
    return _extremize(k, cfg, opts or SolverOptions(), 1.0)


def max_potential(k: Kernel, cfg: Configuration, opts: Optional[SolverOptions] = None):
    """Global maximum of ``p_f(., cfg)``; ``+inf`` at the points when ``f(0) = +inf``."""
    if k.f0.is_posinf:
        return PotentialExtremum(
            value=ExtendedReal.inf(),
            points=cfg.points.copy(),
            method="candidate_set",
            certificate={"evaluations": len(cfg), "reason": "f(0) = +inf"},
        )
    return _extremize(k, cfg, opts or SolverOptions(), -1.0)


# --- closed forms for the regular simplex -------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    value: ExtendedReal
    certified: bool  # the kernel class makes this value a proven extremum
    note: str = ""

    def to_json(self):
        return {"value": self.value.to_json(), "certified": self.certified, "note": self.note}


def _antipodal_form(k: Kernel, d: int) -> ExtendedReal:
    # value at a point of -w*: one distance 4, d distances 2 - 2/d
    return k.eval(4.0) + d * k.eval(2.0 - 2.0 / d)


def _vertex_form(k: Kernel, d: int) -> ExtendedReal:
    # value at a point of w*: one distance 0, d distances 2 + 2/d
    return k.eval(0.0) + d * k.eval(2.0 + 2.0 / d)


def _check_d(d):
    if int(d) < 2:
        raise InvalidParameterError("d must be >= 2")
    return int(d)


def simplex_min_closed_form(k: Kernel, d: int, kclass=None) -> ClosedForm:
    """``f(4) + d f(2 - 2/d)``: the minimum when ``f'`` is concave."""
    d = _check_d(d)
    kclass = kclass or classify_kernel(k)
    ok = kclass.concave_derivative
    return ClosedForm(_antipodal_form(k, d), ok, "" if ok else "formula only, location unproven")


def simplex_max_closed_form(k: Kernel, d: int, kclass=None) -> ClosedForm:
    """``f(0) + d f(2 + 2/d)``: the maximum when ``f'`` is concave."""
    d = _check_d(d)
    kclass = kclass or classify_kernel(k)
    ok = kclass.concave_derivative
    return ClosedForm(_vertex_form(k, d), ok, "" if ok else "formula only, location unproven")


@dataclass(frozen=True)
class SimplexExtrema:
    minimum: ClosedForm
    maximum: ClosedForm
    argmin: str  # "-omega*" | "omega*" | "constant" | "unknown"
    argmax: str


def simplex_extrema_closed_form(k: Kernel, d: int, kclass=None) -> SimplexExtrema:
    """Closed-form extrema of the regular-simplex potential by derivative shape.

    A concave ``f'`` puts the minimum on the antipodes ``-w*`` and the maximum
    on ``w*``; a convex ``f'`` (with ``f(0)`` finite) swaps the roles; an
    affine ``f'`` makes the potential constant.
    """
    d = _check_d(d)
    kclass = kclass or classify_kernel(k)
    anti = _antipodal_form(k, d)
    vert = _vertex_form(k, d)
    shape = kclass.deriv_shape
    if shape == "affine":
        return SimplexExtrema(
            ClosedForm(anti, True), ClosedForm(vert, True), "constant", "constant"
        )
    if shape == "concave":
        return SimplexExtrema(ClosedForm(anti, True), ClosedForm(vert, True), "-omega*", "omega*")
    if shape == "convex" and not k.f0.is_neginf:
        return SimplexExtrema(ClosedForm(vert, True), ClosedForm(anti, True), "omega*", "-omega*")
    note = "formula only, location unproven"
    return SimplexExtrema(
        ClosedForm(min(anti, vert), False, note),
        ClosedForm(max(anti, vert), False, note),
        "unknown",
        "unknown",
    )


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    dist = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))
