"""Configurations of d+1 points on S^{d-1} and the geometry of their simplex."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DegenerateConfigurationError, InvalidParameterError, PreconditionError

UNIT_TOL = 1e-10
LOAD_TOL = 1e-8
DET_TOL = 1e-10
BARY_TOL = 1e-10
RIGIDITY_TOL = 1e-8
REGULAR_TOL = 1e-9


class Configuration:
    """An ordered set of ``d + 1`` unit vectors in ``R^d``.

    The point array is copied and made read-only.
    """

    def __init__(self, points, tol: float = UNIT_TOL):
        pts = np.array(points, dtype=float)
        if pts.ndim != 2:
            raise InvalidParameterError("points must be a 2-D array")
        n, d = pts.shape
        if d < 2:
            raise InvalidParameterError("dimension must be >= 2")
        if n != d + 1:
            raise InvalidParameterError(f"need exactly d+1 = {d + 1} points, got {n}")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > tol):
            raise InvalidParameterError("points must lie on the unit sphere")
        pts /= norms[:, None]
        pts.setflags(write=False)
        self._points = pts

    @classmethod
    def from_points(cls, points, tol: float = LOAD_TOL) -> "Configuration":
        """Validate to ``tol`` and renormalize."""
        return cls(points, tol=tol)

    @classmethod
    def normalized(cls, points) -> "Configuration":
        """Project arbitrary nonzero vectors onto the sphere."""
        pts = np.array(points, dtype=float)
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0):
            raise InvalidParameterError("cannot normalize a zero vector")
        return cls(pts / norms[:, None])

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def __len__(self):
        return self._points.shape[0]

    def __repr__(self):
        return f"Configuration(dim={self.dim})"

    @cached_property
    def determinant(self) -> float:
        diffs = self._points[1:] - self._points[0]
        return float(np.linalg.det(diffs))

    @property
    def general_position(self) -> bool:
        return abs(self.determinant) > DET_TOL

    @cached_property
    def gram(self) -> np.ndarray:
        g = self._points @ self._points.T
        g.setflags(write=False)
        return g

    def rotated(self, rotation) -> "Configuration":
        return Configuration(self._points @ np.asarray(rotation, dtype=float).T)

    def to_json(self) -> dict:
        return {"dim": self.dim, "points": self._points.tolist()}

    @classmethod
    def from_json(cls, obj) -> "Configuration":
        pts = np.asarray(obj["points"], dtype=float)
        if "dim" in obj and int(obj["dim"]) != pts.shape[1]:
            raise InvalidParameterError("dim does not match point coordinates")
        return cls.from_points(pts)

    @classmethod
    def load(cls, path) -> "Configuration":
        return cls.from_json(json.loads(Path(path).read_text()))


def regular_simplex(d: int) -> Configuration:
    """Vertices of a regular d-simplex inscribed in ``S^{d-1}``.

    Factorizes the Gram matrix ``(1 + 1/d) I - (1/d) J`` by a Cholesky
    decomposition of its leading ``d x d`` block, so the first vertex is
    ``e_1``, the second lies in ``span(e_1, e_2)`` and so on.
    """
    d = int(d)
    if d < 2:
        raise InvalidParameterError("d must be >= 2")
    gram = np.full((d + 1, d + 1), -1.0 / d)
    np.fill_diagonal(gram, 1.0)
    lower = np.linalg.cholesky(gram[:d, :d])
    last = np.linalg.solve(lower, gram[:d, d])
    return Configuration(np.vstack([lower, last]))


def pairwise_dot_deviation(cfg: Configuration) -> float:
    """Largest ``|x_i . x_j + 1/d|`` over ``i != j``."""
    d = cfg.dim
    g = cfg.gram
    off = g[~np.eye(d + 1, dtype=bool)]
    return float(np.max(np.abs(off + 1.0 / d)))


def is_regular_simplex(cfg: Configuration, tol: float = REGULAR_TOL) -> bool:
    return pairwise_dot_deviation(cfg) <= tol


@dataclass(frozen=True)
class SimplexGeometry:
    """Barycentric coordinates of the origin and facet distances.

    ``normals[i]`` is the unit normal of the facet hyperplane ``H_i`` pointing
    away from ``v_i``; ``H_i = {x : normals[i] . x = offsets[i]}``.
    ``r[i] = |offsets[i]|``, ``a[i] = -normals[i] . v_i`` (signed distance of
    ``v_i`` to the parallel hyperplane through the origin, positive when the
    origin separates them) and ``h[i] = offsets[i] + a[i]`` is the height.
    """

    b: np.ndarray
    r: np.ndarray
    a: np.ndarray
    h: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    origin_location: str  # "interior" | "boundary" | "exterior"

    @property
    def interior(self) -> bool:
        return self.origin_location == "interior"

    @property
    def w(self) -> np.ndarray:
        """Facet-normal points ``w_i``; defined only for an interior origin."""
        if not self.interior:
            raise PreconditionError("w_i is defined only when the origin is interior")
        return self.normals


def _facet_normal(others: np.ndarray) -> np.ndarray:
    # unit normal of the affine hull of d points in R^d
    diffs = others[1:] - others[0]
    _, _, vt = np.linalg.svd(diffs)
    return vt[-1]


def simplex_geometry(cfg: Configuration) -> SimplexGeometry:
    if not cfg.general_position:
        raise DegenerateConfigurationError(
            f"degenerate simplex (det={cfg.determinant:.3e})", cfg.determinant
        )
    v = cfg.points
    n, d = v.shape
    system = np.vstack([v.T, np.ones(n)])
    rhs = np.zeros(d + 1)
    rhs[-1] = 1.0
    b = np.linalg.solve(system, rhs)

    normals = np.empty((n, d))
    offsets = np.empty(n)
    for i in range(n):
        others = np.delete(v, i, axis=0)
        nu = _facet_normal(others)
        c = float(np.mean(others @ nu))
        if nu @ v[i] > c:
            nu, c = -nu, -c
        normals[i] = nu
        offsets[i] = c
    a = -np.einsum("ij,ij->i", normals, v)
    h = offsets + a
    if np.all(b > BARY_TOL):
        loc = "interior"
    elif np.any(b < -BARY_TOL):
        loc = "exterior"
    else:
        loc = "boundary"
    return SimplexGeometry(
        b=b, r=np.abs(offsets), a=a, h=h, normals=normals, offsets=offsets, origin_location=loc
    )


def sum_of_squares(cfg_star: Configuration, x) -> float:
    """``sum_i (x . x_i)**2`` for a regular simplex; equals ``(d+1)/d |x|**2``."""
    if not is_regular_simplex(cfg_star):
        raise PreconditionError("configuration is not a regular simplex")
    x = np.asarray(x, dtype=float)
    if x.shape != (cfg_star.dim,):
        raise InvalidParameterError("x has the wrong dimension")
    return float(np.sum((cfg_star.points @ x) ** 2))


def check_rigidity(cfg: Configuration, geometry: Optional[SimplexGeometry] = None) -> bool:
    """True iff every ``b_i = 1/(d+1)`` and every ``r_i = 1/d`` (within 1e-8)."""
    geo = geometry or simplex_geometry(cfg)
    if not geo.interior:
        raise PreconditionError("rigidity check needs the origin inside the simplex")
    d = cfg.dim
    return bool(
        np.all(np.abs(geo.b - 1.0 / (d + 1)) <= RIGIDITY_TOL)
        and np.all(np.abs(geo.r - 1.0 / d) <= RIGIDITY_TOL)
    )


# --- random configurations -------------------------------------------------------


def random_sphere_points(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def geodesic_perturb(points, rng: np.random.Generator, angle: float) -> np.ndarray:
    """Move each point a geodesic distance ``angle`` in a random tangent direction.

    ``angle`` may be a scalar or a column of per-point angles.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dirs = rng.standard_normal(pts.shape)
    dirs -= np.sum(dirs * pts, axis=1, keepdims=True) * pts
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return np.cos(angle) * pts + np.sin(angle) * dirs


def random_interior_configuration(
    rng: np.random.Generator, d: int, max_tries: int = 100000
) -> Configuration:
    """Uniform random configuration conditioned on the origin lying inside."""
    batch = max(16, 2 ** (d + 1))
    tries = 0
    rhs = np.zeros(d + 1)
    rhs[-1] = 1.0
    while tries < max_tries:
        pts = random_sphere_points(rng, batch * (d + 1), d).reshape(batch, d + 1, d)
        tries += batch
        systems = np.concatenate([pts.transpose(0, 2, 1), np.ones((batch, 1, d + 1))], axis=1)
        bary = np.linalg.solve(systems, np.broadcast_to(rhs, (batch, d + 1))[..., None])[..., 0]
        for j in np.flatnonzero(np.all(bary > BARY_TOL, axis=1)):
            cfg = Configuration(pts[j])
            if cfg.general_position and simplex_geometry(cfg).interior:
                return cfg
    raise RuntimeError("rejection sampling failed")


def random_hemisphere_configuration(rng: np.random.Generator, d: int) -> Configuration:
    """Random configuration inside the open hemisphere ``x . e_1 > 0``."""
    pts = random_sphere_points(rng, d + 1, d)
    pts[:, 0] = np.abs(pts[:, 0]) + 1e-3
    return Configuration.normalized(pts)
