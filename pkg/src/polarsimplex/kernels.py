"""Potential functions of the squared distance ``t = |x - y|**2`` in ``[0, 4]``.

Four families are built in (Riesz, logarithmic, Gaussian, shifted Riesz) plus
an affine test kernel. Every kernel evaluates to an :class:`ExtendedReal` on
scalars and to float arrays (``+inf`` allowed only at ``t = 0``) on arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidParameterError
from .extended import ExtendedReal

DOMAIN_CLAMP = 1e-12
CLASSIFY_RTOL = 1e-10
FD_REL_STEP = 1e-4


class Kernel:
    """A potential function ``f: [0, 4] -> (-inf, inf]``.

    Parameters
    ----------
    name : str
        Family identifier (``"riesz"``, ``"log"``, ...).
    params : dict
        Family parameters, e.g. ``{"s": 1.0}``.
    func : callable
        Vectorized evaluation on ``t > 0``.
    value_at_zero : ExtendedReal
        ``f(0)``, the limit value of ``f`` as ``t -> 0+``.
    deriv : callable, optional
        Vectorized analytic derivative on ``(0, 4)``. Without it, central
        finite differences are used.
    """

    def __init__(
        self,
        name: str,
        params: dict,
        func: Callable[[np.ndarray], np.ndarray],
        value_at_zero: ExtendedReal,
        deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        self._name = name
        self._params = dict(params)
        self._func = func
        self._f0 = ExtendedReal.coerce(value_at_zero)
        self._deriv = deriv

    @property
    def name(self) -> str:
        return self._name

    @property
    def params(self) -> dict:
        return dict(self._params)

    @property
    def f0(self) -> ExtendedReal:
        return self._f0

    @property
    def has_analytic_derivative(self) -> bool:
        return self._deriv is not None

    @property
    def spec(self) -> str:
        """Canonical kernel-spec string, parseable by :func:`parse_kernel_spec`."""
        if not self._params:
            return self._name
        body = ",".join(f"{k}={v!r}" for k, v in self._params.items())
        return f"{self._name}:{body}"

    def __repr__(self):
        return f"Kernel({self.spec})"

    def eval(self, t: float) -> ExtendedReal:
        t = float(t)
        if not (-DOMAIN_CLAMP <= t <= 4.0 + DOMAIN_CLAMP):
            raise DomainError(f"t={t!r} outside [0, 4]")
        t = min(max(t, 0.0), 4.0)
        if t == 0.0:
            return self._f0
        return ExtendedReal(float(self._func(np.asarray(t))))

    __call__ = eval

    def values(self, t) -> np.ndarray:
        """Vectorized evaluation; ``t`` is clipped to ``[0, 4]``."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 4.0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.asarray(self._func(t), dtype=float)
        zero = t == 0.0
        if np.any(zero):
            out = np.where(zero, float(self._f0), out)
        return out

    def deriv(self, t):
        """Derivative ``f'(t)``; analytic when available."""
        if self._deriv is None:
            return self.fd_deriv(t)
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self._deriv(t)
        return out if out.ndim else float(out)

    def fd_deriv(self, t):
        """Central difference with step proportional to ``t``."""
        t = np.asarray(t, dtype=float)
        h = FD_REL_STEP * t
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = (self._func(t + h) - self._func(t - h)) / (2.0 * h)
        return out if np.ndim(out) else float(out)


def _check_real(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return value


def shifted_riesz_kernel(s: float, c: float = 0.0) -> Kernel:
    """``f(t) = sign(s) * (t + c)**(-s/2)``, ``c >= 0``."""
    s = _check_real("s", s)
    c = _check_real("c", c)
    if s == 0:
        raise InvalidParameterError("s must be nonzero")
    if c < 0:
        raise InvalidParameterError("c must be >= 0")
    sgn = 1.0 if s > 0 else -1.0
    p = -s / 2.0

    def func(t):
        return sgn * (t + c) ** p

    def deriv(t):
        return -(abs(s) / 2.0) * (t + c) ** (p - 1.0)

    if c > 0:
        f0 = ExtendedReal(sgn * c**p)
    elif s > 0:
        f0 = ExtendedReal.inf()
    else:
        f0 = ExtendedReal(0.0)
    return Kernel("sriesz", {"s": s, "c": c}, func, f0, deriv)


def riesz_kernel(s: float) -> Kernel:
    """Riesz kernel ``t**(-s/2)`` for ``s > 0`` and ``-t**(-s/2)`` for ``s < 0``."""
    s = _check_real("s", s)
    if s == 0:
        raise InvalidParameterError("s = 0 is the logarithmic kernel; use log_kernel()")
    base = shifted_riesz_kernel(s, 0.0)
    return Kernel("riesz", {"s": s}, base._func, base.f0, base._deriv)


def log_kernel() -> Kernel:
    def func(t):
        return -0.5 * np.log(t)

    def deriv(t):
        return -0.5 / t

    return Kernel("log", {}, func, ExtendedReal.inf(), deriv)


def gaussian_kernel(sigma: float) -> Kernel:
    sigma = _check_real("sigma", sigma)
    if sigma <= 0:
        raise InvalidParameterError("sigma must be > 0")

    def func(t):
        return np.exp(-sigma * t)

    def deriv(t):
        return -sigma * np.exp(-sigma * t)

    return Kernel("gauss", {"sigma": sigma}, func, ExtendedReal(1.0), deriv)


def affine_kernel(slope: float = -1.0, intercept: float = 0.0) -> Kernel:
    """``f(t) = intercept + slope * t``; the degenerate case of both theorems."""
    slope = _check_real("slope", slope)
    intercept = _check_real("intercept", intercept)

    def func(t):
        return intercept + slope * t

    def deriv(t):
        return np.full(np.shape(t), slope) if np.ndim(t) else np.asarray(slope)

    return Kernel(
        "affine", {"slope": slope, "intercept": intercept}, func, ExtendedReal(intercept), deriv
    )


# --- classification -----------------------------------------------------------


@dataclass(frozen=True)
class KernelClass:
    nonincreasing: bool
    convex_on_0_4: bool
    deriv_shape: str  # "concave" | "convex" | "affine" | "neither"
    f0_finite: bool
    strictly_convex: bool

    @property
    def concave_derivative(self) -> bool:
        return self.deriv_shape in ("concave", "affine")

    @property
    def convex_derivative(self) -> bool:
        return self.deriv_shape in ("convex", "affine")

    @property
    def eligible_concave_theorem(self) -> bool:
        """Hypotheses of the concave-derivative optimality theorem."""
        return self.nonincreasing and self.convex_on_0_4 and self.concave_derivative

    @property
    def eligible_convex_theorem(self) -> bool:
        """Hypotheses of the convex-derivative optimality theorem (needs finite f(0))."""
        return (
            self.nonincreasing and self.convex_on_0_4 and self.f0_finite and self.convex_derivative
        )

    def to_json(self):
        return {
            "nonincreasing": self.nonincreasing,
            "convex_on_0_4": self.convex_on_0_4,
            "deriv_shape": self.deriv_shape,
            "f0_finite": self.f0_finite,
            "strictly_convex": self.strictly_convex,
        }


def classification_grid(grid_n: int) -> np.ndarray:
    """Geometric grid near 0 merged with a uniform grid on (0, 4]."""
    half = grid_n // 2
    geo = np.geomspace(1e-6, 0.5, grid_n - half)
    uni = np.linspace(4.0 / half, 4.0, half)
    return np.unique(np.concatenate([geo, uni]))


def _midpoint_gaps(values_fn, t, b=None):
    if b is None:
        a, b = t[:-1], t[1:]
    else:
        a = t
    fa, fb, fm = values_fn(a), values_fn(b), values_fn(0.5 * (a + b))
    # positive gap: chord above the midpoint value (convex side)
    gap = 0.5 * (fa + fb) - fm
    scale = np.abs(fa) + np.abs(fb) + np.abs(fm)
    return gap, scale


def classify_kernel(k: Kernel, grid_n: int = 256) -> KernelClass:
    """Numerically test the analytic hypotheses on a grid in (0, 4].

    Violations smaller than ``1e-10`` relative are ignored. The result is
    evidence, not proof.
    """
    if grid_n < 64:
        raise InvalidParameterError("grid_n must be >= 64")
    t = classification_grid(grid_n)
    f = k.values(t)
    band = CLASSIFY_RTOL * (np.abs(f[:-1]) + np.abs(f[1:]))
    nonincreasing = bool(np.all(np.diff(f) <= band))

    gap, scale = _midpoint_gaps(k.values, t)
    tol = CLASSIFY_RTOL * scale
    convex = bool(np.all(gap >= -tol))
    # adjacent grid gaps sit below the tolerance band; strictness needs wide chords
    a = t[t <= 3.9]
    wgap, wscale = _midpoint_gaps(k.values, a, np.minimum(4.0, a + np.maximum(0.1, a)))
    strictly_convex = convex and bool(np.all(wgap > CLASSIFY_RTOL * wscale))

    dgap, dscale = _midpoint_gaps(lambda x: np.asarray(k.deriv(x), dtype=float), t)
    dtol = CLASSIFY_RTOL * dscale
    deriv_convex = bool(np.all(dgap >= -dtol))
    deriv_concave = bool(np.all(dgap <= dtol))
    if deriv_convex and deriv_concave:
        shape = "affine"
    elif deriv_concave:
        shape = "concave"
    elif deriv_convex:
        shape = "convex"
    else:
        shape = "neither"
    return KernelClass(
        nonincreasing=nonincreasing,
        convex_on_0_4=convex,
        deriv_shape=shape,
        f0_finite=k.f0.is_finite,
        strictly_convex=strictly_convex,
    )


def check_continuity_at_zero(k: Kernel) -> bool:
    """Sample ``t = 1e-1 .. 1e-8`` and check monotone approach toward ``f(0)``."""
    t = 10.0 ** -np.arange(1, 9)
    f = k.values(t)
    if k.f0.is_posinf:
        return bool(np.all(np.diff(f) > 0))
    f0 = float(k.f0)
    dist = np.abs(f - f0)
    return bool(np.all(np.diff(dist) <= 1e-15 * (1 + abs(f0))) and dist[-1] < dist[0] + 1e-15)


# --- one-dimensional comparison functions --------------------------------------


def _clamp(t, lo, hi, what):
    t = float(t)
    if not (lo - DOMAIN_CLAMP <= t <= hi + DOMAIN_CLAMP):
        raise DomainError(f"{what}={t!r} outside [{lo}, {hi}]")
    return min(max(t, lo), hi)


def g_transform(k: Kernel, t: float) -> ExtendedReal:
    """``g(t) = f(2 - 2t)`` on ``[-1, 1]``; ``t`` is an inner product of unit vectors."""
    t = _clamp(t, -1.0, 1.0, "t")
    return k.eval(2.0 - 2.0 * t)


def u_function(k: Kernel, d: int, t: float) -> ExtendedReal:
    """``u(t) = f(2 + 2dt) + d f(2 - 2t)`` on ``[-1/d, 1/d]``."""
    if d < 2:
        raise InvalidParameterError("d must be >= 2")
    t = _clamp(t, -1.0 / d, 1.0 / d, "t")
    return k.eval(2.0 + 2.0 * d * t) + d * k.eval(2.0 - 2.0 * t)


def u_values(k: Kernel, d: int, t) -> np.ndarray:
    """Vectorized ``u``; infinite entries come out as ``+inf``."""
    t = np.asarray(t, dtype=float)
    return k.values(2.0 + 2.0 * d * t) + d * k.values(2.0 - 2.0 * t)


# --- CLI spec strings ----------------------------------------------------------

_FAMILIES = {
    "riesz": (riesz_kernel, ("s",), {}),
    "log": (log_kernel, (), {}),
    "gauss": (gaussian_kernel, ("sigma",), {}),
    "gaussian": (gaussian_kernel, ("sigma",), {}),
    "sriesz": (shifted_riesz_kernel, ("s", "c"), {"c": 0.0}),
    "affine": (affine_kernel, ("slope", "intercept"), {"slope": -1.0, "intercept": 0.0}),
}


def parse_kernel_spec(text: str) -> Kernel:
    """Parse ``riesz:s=1``, ``log``, ``gauss:sigma=2``, ``sriesz:s=2,c=0.5``.

    Names and keys are case-insensitive; unknown names or keys raise
    :class:`InvalidParameterError`.
    """
    text = text.strip().lower()
    name, _, body = text.partition(":")
    name = name.strip()
    if name not in _FAMILIES:
        raise InvalidParameterError(f"unknown kernel family {name!r}")
    factory, keys, defaults = _FAMILIES[name]
    kwargs = dict(defaults)
    if body.strip():
        for item in body.split(","):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or key not in keys:
                raise InvalidParameterError(f"bad parameter {item.strip()!r} for {name}")
            try:
                kwargs[key] = float(val)
            except ValueError as exc:
                raise InvalidParameterError(f"bad value for {key}: {val!r}") from exc
    missing = [key for key in keys if key not in kwargs]
    if missing:
        raise InvalidParameterError(f"{name} needs {', '.join(missing)}")
    return factory(**kwargs)


def builtin_kernels() -> list:
    """The kernel suite used by the verification and acceptance runs."""
    return [
        riesz_kernel(1.0),
        riesz_kernel(2.0),
        riesz_kernel(4.0),
        riesz_kernel(-1.0),
        riesz_kernel(-3.0),
        log_kernel(),
        gaussian_kernel(1.0),
        gaussian_kernel(2.0),
        shifted_riesz_kernel(2.0, 0.5),
        shifted_riesz_kernel(-2.0, 0.0),
    ]
