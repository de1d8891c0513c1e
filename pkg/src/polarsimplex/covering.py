"""Covering radius ``eta(w) = max_x min_i |x - v_i|`` of a configuration."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, PreconditionError
from .geometry import Configuration, random_sphere_points, simplex_geometry
from .manifold import sphere_descent

RANK_TOL = 1e-12
ACTIVE_TOL = 1e-6


@dataclass
class CoveringReport:
    eta: float
    witness: np.ndarray
    method: str  # voronoi_candidates | multistart | grid
    candidates: int = 0

    def to_json(self):
        return {
            "eta": self.eta,
            "witness": self.witness.tolist(),
            "method": self.method,
            "candidates": self.candidates,
        }


def nearest_distances(points: np.ndarray, xs) -> np.ndarray:
    """``min_i |x - v_i|`` for every row ``x`` of ``xs``."""
    dots = np.atleast_2d(xs) @ points.T
    return np.sqrt(np.clip(2.0 - 2.0 * dots.max(axis=1), 0.0, 4.0))


def _equidistant_candidates(points: np.ndarray, subset) -> list:
    """Critical points of the distance to ``subset`` on its equidistant subsphere.

    Points equidistant from the unit vectors ``v_j, j in subset`` form the
    great subsphere orthogonal to the differences ``v_j - v_j0``. On it the
    distance to ``v_j0`` is extremal at ``+-P v_j0 / |P v_j0|``, ``P`` the
    orthogonal projector. When ``P v_j0 = 0`` the distance is constant there
    and a basis of the subsphere stands in.
    """
    base = points[subset[0]]
    d = points.shape[1]
    if len(subset) > 1:
        diffs = points[list(subset[1:])] - base
        _, sv, vt = np.linalg.svd(diffs)
        rank = int(np.sum(sv > RANK_TOL * max(1.0, sv[0])))
        comp = vt[rank:]
    else:
        comp = np.eye(d)
    if comp.shape[0] == 0:
        return []
    proj = comp.T @ (comp @ base)
    norm = np.linalg.norm(proj)
    if norm > RANK_TOL:
        u = proj / norm
        return [u, -u]
    return [s * row for row in comp for s in (1.0, -1.0)]


def covering_candidates(cfg: Configuration) -> np.ndarray:
    """Every KKT point of the max-min distance problem, over all active subsets."""
    pts = cfg.points
    n, d = pts.shape
    out = []
    for size in range(1, min(d, n) + 1):
        for subset in itertools.combinations(range(n), size):
            out.extend(_equidistant_candidates(pts, subset))
    return np.array(out).reshape(-1, d)


def _softmin_value_grad(points, temperature):
    def fun(xs):
        t = 2.0 - 2.0 * xs @ points.T
        z = -t / temperature
        zmax = z.max(axis=1, keepdims=True)
        w = np.exp(z - zmax)
        s = w.sum(axis=1, keepdims=True)
        softmin = -temperature * (zmax[:, 0] + np.log(s[:, 0]))
        grad = (w / s) @ (-2.0 * points)
        # maximize the soft-min: minimize its negative
        return -softmin, -grad

    return fun


def _multistart_eta(cfg: Configuration, starts: int, seed: int):
    pts = cfg.points
    rng = np.random.default_rng(seed)
    x = np.vstack([-pts, random_sphere_points(rng, starts, cfg.dim)])
    temperature = 1.0
    while temperature >= 1e-4:
        x = sphere_descent(_softmin_value_grad(pts, temperature), x, tol=1e-9, max_iter=200).points
        temperature *= 0.5
    # polish: snap each point to the KKT candidate of its active set
    polished = [x]
    dist = nearest_distances(pts, x)
    for xi, di in zip(x, dist):
        active = np.flatnonzero(np.abs(np.linalg.norm(pts - xi, axis=1) - di) <= ACTIVE_TOL)
        polished.append(np.array(_equidistant_candidates(pts, tuple(active))).reshape(-1, cfg.dim))
    return np.vstack(polished)


def covering_radius(cfg: Configuration, starts: int = 64, seed: int = 0) -> CoveringReport:
    """Exact covering radius by enumerating equidistant-point candidates.

    Configurations that are not in general position additionally run a
    smoothed multistart search, and the method is reported as ``multistart``.
    """
    cands = covering_candidates(cfg)
    method = "voronoi_candidates"
    if not cfg.general_position:
        cands = np.vstack([cands, _multistart_eta(cfg, starts, seed)])
        method = "multistart"
    dist = nearest_distances(cfg.points, cands)
    best = int(np.argmax(dist))
    return CoveringReport(
        eta=float(dist[best]), witness=cands[best], method=method, candidates=int(cands.shape[0])
    )


def covering_radius_grid(cfg: Configuration, n=None) -> CoveringReport:
    """Brute-force covering radius over a dense grid (``d <= 3``)."""
    from .potential import sphere_grid

    grid = sphere_grid(cfg.dim, n)
    dist = nearest_distances(cfg.points, grid)
    best = int(np.argmax(dist))
    return CoveringReport(float(dist[best]), grid[best], "grid", int(grid.shape[0]))


def cap_chord(r: float) -> float:
    """Euclidean radius ``sqrt(2 - 2r)`` of the cap cut by a hyperplane at distance ``r``."""
    r = float(r)
    if not -1e-12 <= r <= 1.0 + 1e-12:
        raise InvalidParameterError("r must lie in [0, 1]")
    return math.sqrt(max(0.0, 2.0 - 2.0 * r))


def cap_radius(cfg: Configuration, i: int) -> float:
    """Radius of the open cap cut off by facet ``i`` on the side away from ``v_i``."""
    geo = simplex_geometry(cfg)
    if not geo.interior:
        raise PreconditionError("cap radius needs the origin inside the simplex")
    if not 0 <= i < len(cfg):
        raise InvalidParameterError(f"facet index {i} out of range")
    return cap_chord(geo.r[i])


def optimal_covering_value(d: int) -> float:
    """Smallest covering radius of ``d + 1`` points on ``S^{d-1}``: ``sqrt(2 - 2/d)``."""
    if int(d) < 2:
        raise InvalidParameterError("d must be >= 2")
    return math.sqrt(2.0 - 2.0 / int(d))
