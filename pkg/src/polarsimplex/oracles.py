"""Sampled checks of the inequalities behind the optimality results.

Every oracle returns an :class:`OracleVerdict` whose ``worst_margin`` is the
smallest observed slack (positive means satisfied). Comparisons with ``+inf``
on the large side hold trivially and are counted separately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameterError, PreconditionError
from .geometry import (
    Configuration,
    check_rigidity,
    random_hemisphere_configuration,
    random_interior_configuration,
    random_sphere_points,
    regular_simplex,
    simplex_geometry,
)
from .kernels import Kernel, KernelClass, classify_kernel, u_values
from .potential import SolverOptions, min_potential

PASS_TOL = 1e-10
STRICT_GAP = 1e-4
DIRECT_RATE = 0.1
BARY_STRICT = 1e-6


@dataclass
class OracleVerdict:
    lemma_id: str
    samples: int
    worst_margin: float
    counterexample: Optional[dict] = None
    trivial_count: int = 0
    strict_checked: int = 0
    strict_failures: int = 0
    tight_margin: Optional[float] = None  # largest |margin| over the equality cases
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -PASS_TOL and self.strict_failures == 0

    def to_json(self):
        return {
            "lemma_id": self.lemma_id,
            "passed": self.passed,
            "samples": self.samples,
            "worst_margin": self.worst_margin,
            "counterexample": self.counterexample,
            "trivial_count": self.trivial_count,
            "strict_checked": self.strict_checked,
            "strict_failures": self.strict_failures,
            "tight_margin": self.tight_margin,
            "details": self.details,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class _MarginLog:
    """Running minimum of margins with the sample that produced it."""

    def __init__(self):
        self.worst = np.inf
        self.record = None
        self.trivial = 0

    def add(self, margins: np.ndarray, records):
        margins = np.asarray(margins, dtype=float)
        finite = np.isfinite(margins)
        self.trivial += int(np.sum(margins == np.inf))
        bad = margins == -np.inf
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            self.worst = -np.inf
            self.record = records(i)
            return
        if finite.any():
            i = int(np.argmin(np.where(finite, margins, np.inf)))
            if margins[i] < self.worst:
                self.worst = float(margins[i])
                self.record = records(i)


def _kclass(k: Kernel, kclass: Optional[KernelClass]) -> KernelClass:
    return kclass or classify_kernel(k)


def _check_d(d):
    d = int(d)
    if d < 2:
        raise InvalidParameterError("d must be >= 2")
    return d


def _diff(big, small):
    """``big - small`` for arrays that may hold ``+inf``; ``inf - inf`` -> ``+inf``."""
    big = np.asarray(big, dtype=float)
    small = np.asarray(small, dtype=float)
    out = np.full(np.broadcast(big, small).shape, np.inf)
    both = np.isinf(big) & np.isinf(small)
    with np.errstate(invalid="ignore"):
        np.subtract(big, small, out=out, where=~both)
    return out


# --- g inequality -------------------------------------------------------------------


def g_bounds(k: Kernel, d: int):
    """Lower and upper bounds ``g(-1) + d g(1/d)`` and ``g(1) + d g(-1/d)``."""
    lower = k.eval(4.0) + d * k.eval(2.0 - 2.0 / d)
    upper = k.eval(0.0) + d * k.eval(2.0 + 2.0 / d)
    return lower, upper


def g_inequality_margins(k: Kernel, d: int, t) -> np.ndarray:
    """Margins ``(sum g(t_i) - lower, upper - sum g(t_i))`` for each row of ``t``."""
    d = _check_d(d)
    t = np.atleast_2d(np.asarray(t, dtype=float))
    sums = k.values(np.clip(2.0 - 2.0 * t, 0.0, 4.0)).sum(axis=1)
    lower, upper = g_bounds(k, d)
    return np.column_stack([_diff(sums, float(lower)), _diff(float(upper), sums)])


def _direct_tuples(rng, n, d):
    # uniform on {sum t = 0, |t|^2 = (d+1)/d} via an orthonormal null-space basis
    basis = np.linalg.svd(np.ones((1, d + 1)))[2][1:]
    z = random_sphere_points(rng, n, d)
    return np.sqrt((d + 1) / d) * z @ basis


def oracle_g_inequality(
    k: Kernel, d: int, samples: int = 10_000, seed: int = 0, kclass: Optional[KernelClass] = None
) -> OracleVerdict:
    """Check ``g(-1) + d g(1/d) <= sum g(t_i) <= g(1) + d g(-1/d)``.

    Tuples are inner products ``t_i = x . x_i`` against a regular simplex,
    which satisfy ``sum t_i = 0`` and ``sum t_i**2 = (d+1)/d`` exactly. A
    tenth of the samples come from a direct parameterization of the same
    constraint set instead. The equality tuples at ``x = +-x_i`` are always
    included.
    """
    d = _check_d(d)
    cls = _kclass(k, kclass)
    if not cls.concave_derivative:
        raise PreconditionError("the g inequality needs a concave derivative f'")
    if samples < 1:
        raise InvalidParameterError("samples must be positive")
    rng = np.random.default_rng(seed)
    star = regular_simplex(d).points
    n_direct = int(round(DIRECT_RATE * samples))
    n_geo = samples - n_direct
    corners = np.vstack([-star, star]) @ star.T
    t = np.vstack(
        [corners, random_sphere_points(rng, n_geo, d) @ star.T, _direct_tuples(rng, n_direct, d)]
    )
    margins = g_inequality_margins(k, d, t)

    log = _MarginLog()
    for side, col in (("lower", 0), ("upper", 1)):
        log.add(
            margins[:, col],
            lambda i, side=side, col=col: {
                "side": side,
                "t": t[i].tolist(),
                "margin": float(margins[i, col]),
            },
        )

    n_c = corners.shape[0]
    tight = np.concatenate([margins[: d + 1, 0], margins[d + 1 : n_c, 1]])
    tight = tight[np.isfinite(tight)]

    strict_checked = strict_failures = 0
    if cls.deriv_shape == "concave":
        body = margins[n_c:]
        tb = t[n_c:]
        low_rows = tb.min(axis=1) > -1.0 + STRICT_GAP
        up_rows = (tb.max(axis=1) < 1.0 - STRICT_GAP) & np.isfinite(body[:, 1])
        strict_checked = int(low_rows.sum() + up_rows.sum())
        strict_failures = int(np.sum(body[low_rows, 0] <= 0) + np.sum(body[up_rows, 1] <= 0))

    return OracleVerdict(
        lemma_id="g_q",
        samples=int(t.shape[0]),
        worst_margin=float(log.worst),
        counterexample=log.record if log.worst < -PASS_TOL else None,
        trivial_count=log.trivial,
        strict_checked=strict_checked,
        strict_failures=strict_failures,
        tight_margin=float(np.max(np.abs(tight))) if tight.size else None,
        details={
            "kernel": k.spec,
            "d": d,
            "direct_samples": n_direct,
            "seed": seed,
            "worst_record": log.record,
        },
    )


# --- u monotonicity -----------------------------------------------------------------


def oracle_u_monotone(
    k: Kernel, d: int, grid_n: int = 1000, kclass: Optional[KernelClass] = None
) -> OracleVerdict:
    """``u`` is non-decreasing on ``[0, 1/d]`` and non-increasing on ``[-1/d, 0]``."""
    d = _check_d(d)
    cls = _kclass(k, kclass)
    if not cls.convex_on_0_4:
        raise PreconditionError("u monotonicity needs a convex kernel")
    if grid_n < 2:
        raise InvalidParameterError("grid_n must be >= 2")
    up = np.linspace(0.0, 1.0 / d, grid_n)
    down = np.linspace(-1.0 / d, 0.0, grid_n)
    u_up = u_values(k, d, up)
    u_down = u_values(k, d, down)
    inc = _diff(u_up[1:], u_up[:-1])
    dec = _diff(u_down[:-1], u_down[1:])

    log = _MarginLog()
    log.add(
        inc, lambda i: {"interval": "[0,1/d]", "t": [up[i], up[i + 1]], "margin": float(inc[i])}
    )
    log.add(
        dec,
        lambda i: {"interval": "[-1/d,0]", "t": [down[i], down[i + 1]], "margin": float(dec[i])},
    )

    strict_checked = strict_failures = 0
    if cls.strictly_convex:
        both = np.concatenate([inc, dec])
        strict_checked = int(both.size)
        strict_failures = int(np.sum(both <= 0))
    return OracleVerdict(
        lemma_id="u",
        samples=int(inc.size + dec.size),
        worst_margin=float(log.worst),
        counterexample=log.record if log.worst < -PASS_TOL else None,
        trivial_count=log.trivial,
        strict_checked=strict_checked,
        strict_failures=strict_failures,
        details={"kernel": k.spec, "d": d, "grid_n": grid_n, "worst_record": log.record},
    )


# --- barycentric inequalities -------------------------------------------------------


def barycentric_margins(cfg: Configuration):
    """Indices with ``b_i <= 1/(d+1)`` and their margins ``1/d - r_i``, ``a_i - d r_i``."""
    geo = simplex_geometry(cfg)
    if not geo.interior:
        raise PreconditionError("needs the origin inside the simplex")
    d = cfg.dim
    idx = np.flatnonzero(geo.b <= 1.0 / (d + 1) + 1e-12)
    return idx, 1.0 / d - geo.r[idx], geo.a[idx] - d * geo.r[idx], geo.b[idx]


def oracle_barycentric(d: int, samples: int = 1000, seed: int = 0) -> OracleVerdict:
    """``r_i <= 1/d`` and ``d r_i <= a_i`` whenever ``b_i <= 1/(d+1)``."""
    d = _check_d(d)
    if samples < 1:
        raise InvalidParameterError("samples must be positive")
    rng = np.random.default_rng(seed)
    log = _MarginLog()
    strict_checked = strict_failures = 0
    _, m1, m2, _ = barycentric_margins(regular_simplex(d))
    tight = float(np.max(np.abs(np.concatenate([m1, m2]))))
    log.add(np.concatenate([m1, m2]), lambda i: {"config": "regular", "margin": tight})
    for s in range(samples):
        cfg = random_interior_configuration(rng, d)
        idx, m1, m2, b = barycentric_margins(cfg)
        both = np.concatenate([m1, m2])
        log.add(
            both,
            lambda i, cfg=cfg, idx=idx, s=s, both=both: {
                "sample": s,
                "index": int(idx[i % len(idx)]),
                "which": "r_i <= 1/d" if i < len(idx) else "d r_i <= a_i",
                "points": cfg.points.tolist(),
                "margin": float(both[i]),
            },
        )
        strict = b < 1.0 / (d + 1) - BARY_STRICT
        strict_checked += int(2 * strict.sum())
        strict_failures += int(np.sum(m1[strict] <= 0) + np.sum(m2[strict] <= 0))
    return OracleVerdict(
        lemma_id="barycentric",
        samples=samples + 1,
        worst_margin=float(log.worst),
        counterexample=log.record if log.worst < -PASS_TOL else None,
        trivial_count=log.trivial,
        strict_checked=strict_checked,
        strict_failures=strict_failures,
        tight_margin=tight,
        details={"d": d, "seed": seed},
    )


# --- interior and hemisphere bounds --------------------------------------------------


def interior_bounds(k: Kernel, d: int):
    """``(f(4) + d f(2 - 2/d), f(0) + d f(2 + 2/d))``."""
    return g_bounds(k, d)


def oracle_interior_bounds(
    k: Kernel,
    d: int,
    samples: int = 200,
    seed: int = 0,
    kclass: Optional[KernelClass] = None,
    hemisphere: bool = False,
    opts: Optional[SolverOptions] = None,
) -> OracleVerdict:
    """``P_f(w)`` against ``f(4) + d f(2-2/d)`` and ``f(0) + d f(2+2/d)``.

    With ``hemisphere=False`` the samples are interior-origin configurations
    and both bounds are checked separately (the regular simplex is included
    as the equality case). With ``hemisphere=True`` the samples lie in an
    open hemisphere and ``P_f`` is checked against the smaller bound.
    ``P_f`` is computed by the numerical engine.
    """
    d = _check_d(d)
    cls = _kclass(k, kclass)
    if not (cls.nonincreasing and cls.convex_on_0_4):
        raise PreconditionError("the bounds need a nonincreasing convex kernel")
    if samples < 1:
        raise InvalidParameterError("samples must be positive")
    rng = np.random.default_rng(seed)
    base = opts or SolverOptions(starts=4 * d, use_grid=False)
    first, second = (float(b) for b in interior_bounds(k, d))
    if hemisphere:
        cap = min(first, second)

    configs = []
    if not hemisphere:
        configs.append(("regular", regular_simplex(d)))
    for s in range(samples):
        if hemisphere:
            configs.append((s, random_hemisphere_configuration(rng, d)))
        else:
            configs.append((s, random_interior_configuration(rng, d)))

    log = _MarginLog()
    strict_checked = strict_failures = 0
    tight = None
    for j, (label, cfg) in enumerate(configs):
        run = SolverOptions(
            starts=base.starts,
            tol=base.tol,
            max_iter=base.max_iter,
            grid_res=base.grid_res,
            use_grid=base.use_grid,
            seed=base.seed + j,
        )
        value = float(min_potential(k, cfg, run).value)
        if hemisphere:
            margins = _diff(np.array([cap]), np.array([value]))
        else:
            margins = _diff(np.array([first, second]), np.array([value, value]))
        log.add(
            margins,
            lambda i, label=label, cfg=cfg, value=value, margins=margins: {
                "sample": label,
                "bound": ("hemisphere", "first", "second")[0 if hemisphere else i + 1],
                "P": value,
                "points": cfg.points.tolist(),
                "margin": float(margins[i]),
            },
        )
        if label == "regular":
            fin = margins[np.isfinite(margins)]
            tight = float(np.min(np.abs(fin))) if fin.size else None
            continue
        rigid = (not hemisphere) and check_rigidity(cfg)
        if cls.strictly_convex and not rigid:
            fin = np.isfinite(margins)
            strict_checked += int(fin.sum())
            strict_failures += int(np.sum(margins[fin] <= 0))
    return OracleVerdict(
        lemma_id="hemisphere" if hemisphere else "bounds",
        samples=len(configs),
        worst_margin=float(log.worst),
        counterexample=log.record if log.worst < -PASS_TOL else None,
        trivial_count=log.trivial,
        strict_checked=strict_checked,
        strict_failures=strict_failures,
        tight_margin=tight,
        details={
            "kernel": k.spec,
            "d": d,
            "seed": seed,
            "bounds": [first, second],
            "engine": base.to_json(),
        },
    )


LEMMAS = ("g_q", "u", "barycentric", "bounds", "hemisphere")


def run_oracle(lemma: str, k: Optional[Kernel], d: int, samples: Optional[int], seed: int):
    """Dispatch by lemma id, with the default sample counts."""
    if lemma == "g_q":
        return oracle_g_inequality(k, d, samples or 10_000, seed)
    if lemma == "u":
        return oracle_u_monotone(k, d, samples or 1000)
    if lemma == "barycentric":
        return oracle_barycentric(d, samples or 1000, seed)
    if lemma == "bounds":
        return oracle_interior_bounds(k, d, samples or 200, seed)
    if lemma == "hemisphere":
        return oracle_interior_bounds(k, d, samples or 200, seed, hemisphere=True)
    raise InvalidParameterError(f"unknown lemma {lemma!r}; choose from {', '.join(LEMMAS)}")
