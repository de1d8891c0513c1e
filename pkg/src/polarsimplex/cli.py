"""Command-line interface: ``polarsimplex <command> [options]``.

Commands: ``verify``, ``polarize``, ``cover``, ``oracle``, ``sweep`` and
``kernels``. JSON goes to stdout or ``--out``; sweeps write CSV. Exit codes
are 0 on success, 1 when a check fails and 2 on bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .covering import cap_radius, covering_radius, optimal_covering_value
from .errors import InvalidParameterError, PolarError, PreconditionError
from .extended import ExtendedReal
from .geometry import Configuration, regular_simplex, simplex_geometry, sum_of_squares
from .kernels import (
    builtin_kernels,
    classify_kernel,
    parse_kernel_spec,
    riesz_kernel,
    shifted_riesz_kernel,
)
from .oracles import (
    LEMMAS,
    oracle_barycentric,
    oracle_g_inequality,
    oracle_interior_bounds,
    oracle_u_monotone,
    run_oracle,
)
from .polarization import maximize_polarization
from .potential import (
    SolverOptions,
    hausdorff,
    max_potential,
    min_potential,
    simplex_extrema_closed_form,
)

SCHEMA_VERSION = 1
SEED_ENV = "POLARSIMPLEX_SEED"
VALUE_RTOL = 1e-7
ARGMIN_TOL = 1e-4
CONSTANT_TOL = 1e-9
COVER_TOL = 1e-9
IDENTITY_RTOL = 1e-10
VERIFY_BOUNDS_SAMPLES = 200
CSV_COLUMNS = ["s", "d", "deriv_shape", "P_closed", "P_engine", "argmin_label", "eta"]


# --- serialization ------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, ExtendedReal):
        return obj.to_json()
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(payload) -> str:
    # repr-based floats round-trip exactly (at most 17 significant digits)
    return json.dumps(_clean(payload), indent=2, sort_keys=True)


def fmt17(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return format(x, ".17g")


def manifest(args, **tolerances) -> dict:
    return {
        "command": args.command,
        "kernel": getattr(args, "kernel", None),
        "dim": getattr(args, "dim", None),
        "seed": getattr(args, "seed", None),
        "tolerances": tolerances,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
    }


def _emit(text: str, out):
    if out:
        path = Path(out)
        try:
            path.write_text(text + ("" if text.endswith("\n") else "\n"))
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))


# --- checks ---------------------------------------------------------------------


def _argmin_matches(points, label, d) -> bool:
    star = regular_simplex(d).points
    target = {"-omega*": -star, "omega*": star}.get(label)
    if target is None:
        return True
    return hausdorff(points, target) <= ARGMIN_TOL


def _rel_err(a, b) -> float:
    a, b = ExtendedReal.coerce(a), ExtendedReal.coerce(b)
    if not (a.is_finite and b.is_finite):
        return 0.0 if a == b else math.inf
    return abs(a.value - b.value) / max(1.0, abs(b.value))


def simplex_check(k, d, opts: SolverOptions, kclass=None) -> dict:
    """Engine extrema on the regular simplex against the closed forms."""
    kclass = kclass or classify_kernel(k)
    cfg = regular_simplex(d)
    ext = simplex_extrema_closed_form(k, d, kclass)
    mn = min_potential(k, cfg, opts)
    mx = max_potential(k, cfg, opts)
    out = {
        "closed_min": ext.minimum.value,
        "closed_max": ext.maximum.value,
        "engine_min": mn.value,
        "engine_max": mx.value,
        "expected_argmin": ext.argmin,
        "expected_argmax": ext.argmax,
        "certified": ext.minimum.certified,
        "min_certificate": mn.certificate,
    }
    if ext.argmin == "constant":
        spread = float(mx.value) - float(mn.value)
        out["spread"] = spread
        out["passed"] = (
            spread <= CONSTANT_TOL and _rel_err(mn.value, ext.minimum.value) <= VALUE_RTOL
        )
    elif ext.minimum.certified:
        out["min_rel_err"] = _rel_err(mn.value, ext.minimum.value)
        out["max_rel_err"] = _rel_err(mx.value, ext.maximum.value)
        out["argmin_ok"] = _argmin_matches(mn.points, ext.argmin, d)
        out["passed"] = (
            out["min_rel_err"] <= VALUE_RTOL
            and out["max_rel_err"] <= VALUE_RTOL
            and out["argmin_ok"]
        )
    else:
        out["passed"] = None  # nothing proven to compare against
    return out


def identity_check(d: int, samples: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    cfg = regular_simplex(d)
    xs = rng.standard_normal((samples, d))
    worst = 0.0
    for x in xs:
        lhs = sum_of_squares(cfg, x)
        rhs = (d + 1) / d * float(x @ x)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return {"samples": samples, "worst_rel_err": worst, "passed": worst <= IDENTITY_RTOL}


def covering_check(d: int) -> dict:
    rep = covering_radius(regular_simplex(d))
    target = optimal_covering_value(d)
    return {
        "eta": rep.eta,
        "optimal": target,
        "error": abs(rep.eta - target),
        "passed": abs(rep.eta - target) <= COVER_TOL,
    }


def _oracle_block(fn):
    try:
        verdict = fn()
    except PreconditionError as exc:
        return {"status": "not_applicable", "reason": str(exc), "passed": None}
    out = verdict.to_json()
    out["status"] = "pass" if verdict.passed else "fail"
    return out


# --- commands -------------------------------------------------------------------


def _solver_options(args) -> SolverOptions:
    return SolverOptions(starts=args.starts, tol=args.tol, grid_res=args.grid_res, seed=args.seed)


def cmd_verify(args) -> int:
    k = parse_kernel_spec(args.kernel)
    d = args.dim
    kclass = classify_kernel(k)
    opts = _solver_options(args)
    checks = {
        "simplex_extrema": simplex_check(k, d, opts, kclass),
        "covering": covering_check(d),
        "sum_of_squares": identity_check(d, 1000, args.seed),
        "oracle_g_q": _oracle_block(lambda: oracle_g_inequality(k, d, 10_000, args.seed, kclass)),
        "oracle_u": _oracle_block(lambda: oracle_u_monotone(k, d, 1000, kclass)),
        "oracle_barycentric": _oracle_block(lambda: oracle_barycentric(d, 1000, args.seed)),
        "oracle_bounds": _oracle_block(
            lambda: oracle_interior_bounds(
                k, d, args.samples or VERIFY_BOUNDS_SAMPLES, args.seed, kclass
            )
        ),
    }
    notes = []
    if not (kclass.eligible_concave_theorem or kclass.eligible_convex_theorem):
        ext = checks["simplex_extrema"]
        if ext["certified"] and ext["expected_argmin"] == "omega*":
            notes.append("optimality theorems not applicable; role-reversed min/max verified")
        else:
            notes.append("optimality theorems not applicable")
    failed = [name for name, c in checks.items() if c.get("passed") is False]
    payload = {
        "manifest": manifest(
            args, value_rtol=VALUE_RTOL, argmin_tol=ARGMIN_TOL, cover_tol=COVER_TOL
        ),
        "kernel": k.spec,
        "classification": kclass.to_json(),
        "value": checks["simplex_extrema"]["engine_min"],
        "checks": checks,
        "notes": notes,
        "failed": failed,
        "passed": not failed,
    }
    _emit(dumps(payload), args.out)
    if failed:
        for name in failed:
            print(f"FAILED {name}: {dumps(checks[name])}", file=sys.stderr)
        return 1
    return 0


def cmd_polarize(args) -> int:
    k = parse_kernel_spec(args.kernel)
    opts = SolverOptions(
        starts=args.starts if args.starts is not None else 20,
        tol=args.tol,
        grid_res=args.grid_res,
        seed=args.seed,
    )
    res = maximize_polarization(k, args.dim, opts)
    payload = {"manifest": manifest(args, tol=args.tol), "result": res.to_json()}
    _emit(dumps(payload), args.out)
    return 0


def cmd_cover(args) -> int:
    if (args.config is None) == (args.regular is None):
        raise InvalidParameterError("give exactly one of --config or --regular")
    cfg = Configuration.load(args.config) if args.config else regular_simplex(args.regular)
    args.dim = cfg.dim
    rep = covering_radius(cfg, seed=args.seed)
    payload = {
        "manifest": manifest(args, rank_tol=1e-12),
        "report": rep.to_json(),
        "optimal_value": optimal_covering_value(cfg.dim),
    }
    if cfg.general_position and simplex_geometry(cfg).interior:
        payload["cap_radii"] = [cap_radius(cfg, i) for i in range(len(cfg))]
    _emit(dumps(payload), args.out)
    return 0


def cmd_oracle(args) -> int:
    k = parse_kernel_spec(args.kernel) if args.lemma != "barycentric" else None
    verdict = run_oracle(args.lemma, k, args.dim, args.samples, args.seed)
    payload = {"manifest": manifest(args, pass_tol=1e-10), "verdict": verdict.to_json()}
    _emit(dumps(payload), args.out)
    return 0 if verdict.passed else 1


def sweep_values(smin: float, smax: float, step: float) -> list:
    if step <= 0:
        raise InvalidParameterError("--s-step must be positive")
    if smin > smax:
        return []
    n = int(math.floor((smax - smin) / step + 1e-9)) + 1
    return [round(smin + i * step, 12) for i in range(n)]


def sweep_rows(family: str, values, d: int, opts: SolverOptions, c: float = 0.0) -> list:
    cfg = regular_simplex(d)
    star = cfg.points
    eta = covering_radius(cfg).eta if values else None
    rows = []
    for s in values:
        if abs(s) < 1e-12:
            continue  # s = 0 is the logarithmic kernel, not part of this family
        k = riesz_kernel(s) if family == "riesz" else shifted_riesz_kernel(s, c)
        kclass = classify_kernel(k)
        ext = simplex_extrema_closed_form(k, d, kclass)
        mn = min_potential(k, cfg, opts)
        mx = max_potential(k, cfg, opts)
        spread = float(mx.value) - float(mn.value)
        if spread <= CONSTANT_TOL:
            label = "constant"
        elif hausdorff(mn.points, -star) <= ARGMIN_TOL:
            label = "-omega*"
        elif hausdorff(mn.points, star) <= ARGMIN_TOL:
            label = "omega*"
        else:
            label = "other"
        rows.append(
            {
                "s": s,
                "d": d,
                "deriv_shape": kclass.deriv_shape,
                "P_closed": float(ext.minimum.value),
                "P_engine": float(mn.value),
                "argmin_label": label,
                "eta": eta,
            }
        )
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                fmt17(r["s"]),
                r["d"],
                r["deriv_shape"],
                fmt17(r["P_closed"]),
                fmt17(r["P_engine"]),
                r["argmin_label"],
                fmt17(r["eta"]),
            ]
        )
    return buf.getvalue()


def cmd_sweep(args) -> int:
    values = sweep_values(args.s_min, args.s_max, args.s_step)
    rows = sweep_rows(args.family, values, args.dim, _solver_options(args), args.c)
    _emit(rows_to_csv(rows), args.out)
    return 0


def cmd_kernels(args) -> int:
    out = []
    for k in builtin_kernels():
        out.append({"spec": k.spec, "classification": classify_kernel(k).to_json()})
    _emit(dumps({"manifest": manifest(args), "kernels": out}), args.out)
    return 0


# --- parser ---------------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarsimplex",
        description="Polarization and covering for d+1 points on the sphere.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, kernel=True, dim=True):
        if kernel:
            p.add_argument(
                "--kernel", default="riesz:s=1", help="e.g. riesz:s=1, log, gauss:sigma=2"
            )
        if dim:
            p.add_argument("--dim", type=int, default=3, help="ambient dimension d >= 2")
        p.add_argument(
            "--seed",
            type=int,
            default=_default_seed(),
            help=f"random seed (default: ${SEED_ENV} or 0)",
        )
        p.add_argument("--out", help="write output here instead of stdout")

    def solver(p):
        p.add_argument("--starts", type=int, default=None, help="random starts")
        p.add_argument("--tol", type=float, default=1e-10, help="tangent gradient tolerance")
        p.add_argument("--grid-res", type=int, default=None, help="grid points for d <= 3")

    p = sub.add_parser("verify", help="closed forms, covering, identity and oracles")
    common(p)
    solver(p)
    p.add_argument("--samples", type=int, default=None, help="configurations for the bounds oracle")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("polarize", help="maximize P_f over configurations")
    common(p)
    solver(p)
    p.set_defaults(func=cmd_polarize)

    p = sub.add_parser("cover", help="covering radius of a configuration")
    common(p, kernel=False, dim=False)
    p.add_argument("--config", help="JSON file with {dim, points}")
    p.add_argument("--regular", type=int, help="use the regular simplex in dimension d")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("oracle", help="sampled check of one inequality")
    common(p)
    p.add_argument("--lemma", required=True, choices=LEMMAS)
    p.add_argument("--samples", type=int, default=None, help="samples (grid size for u)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="CSV of extrema across the Riesz s range")
    common(p, kernel=False)
    solver(p)
    p.add_argument("--family", choices=("riesz", "sriesz"), default="riesz")
    p.add_argument("--c", type=float, default=0.0, help="shift for the sriesz family")
    p.add_argument("--s-min", type=float, default=-5.0)
    p.add_argument("--s-max", type=float, default=1.0)
    p.add_argument("--s-step", type=float, default=0.25)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("kernels", help="list built-in kernels and their classification")
    common(p, kernel=False, dim=False)
    p.set_defaults(func=cmd_kernels)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PolarError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
