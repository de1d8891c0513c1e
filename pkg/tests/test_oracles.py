import json
import math

import numpy as np
import pytest

from polarsimplex.errors import InvalidParameterError, PreconditionError
from polarsimplex.geometry import Configuration, regular_simplex, simplex_geometry
from polarsimplex.kernels import (
    gaussian_kernel,
    log_kernel,
    riesz_kernel,
    shifted_riesz_kernel,
)
from polarsimplex.oracles import (
    LEMMAS,
    barycentric_margins,
    g_inequality_margins,
    oracle_barycentric,
    oracle_g_inequality,
    oracle_interior_bounds,
    oracle_u_monotone,
    run_oracle,
)


def test_g_margins_at_equality_tuples():
    low = g_inequality_margins(riesz_kernel(1), 3, [[-1.0, 1 / 3, 1 / 3, 1 / 3]])
    assert abs(low[0, 0]) <= 1e-15
    assert low[0, 1] == np.inf
    up = g_inequality_margins(gaussian_kernel(1), 2, [[1.0, -0.5, -0.5]])
    assert abs(up[0, 1]) <= 1e-15
    assert up[0, 0] > 0


def test_g_inequality_riesz():
    v = oracle_g_inequality(riesz_kernel(1), 3, samples=2000, seed=1)
    assert v.passed
    assert v.tight_margin <= 1e-12
    # off the equality points the lower bound is strict
    assert v.strict_checked > 1000
    assert v.strict_failures == 0
    assert v.trivial_count > 0  # the +inf upper bound makes those margins trivial
    assert v.details["direct_samples"] == 200


def test_g_inequality_gauss_upper_tight():
    v = oracle_g_inequality(gaussian_kernel(1), 2, samples=500)
    assert v.passed
    assert v.tight_margin <= 1e-12
    assert v.worst_margin >= -1e-15


def test_g_inequality_rejects_convex_derivative():
    with pytest.raises(PreconditionError):
        oracle_g_inequality(riesz_kernel(-3), 3, samples=10)


def test_g_inequality_affine_kernel_is_all_equalities():
    v = oracle_g_inequality(shifted_riesz_kernel(-2, 0), 3, samples=200)
    assert v.passed
    assert abs(v.worst_margin) <= 1e-12
    assert v.strict_checked == 0


def test_u_monotone():
    v = oracle_u_monotone(riesz_kernel(1), 3, grid_n=1000)
    assert v.passed and v.strict_checked > 0 and v.strict_failures == 0
    assert oracle_u_monotone(gaussian_kernel(2), 4).passed
    flat = oracle_u_monotone(shifted_riesz_kernel(-2, 0), 3)
    assert flat.passed
    assert abs(flat.worst_margin) <= 1e-12


def test_u_monotone_needs_convexity():
    with pytest.raises(PreconditionError):
        oracle_u_monotone(riesz_kernel(-3), 2)


def test_barycentric_random():
    v = oracle_barycentric(3, samples=300, seed=2)
    assert v.passed
    assert v.tight_margin <= 1e-12
    assert v.strict_checked > 0 and v.strict_failures == 0


def _apex_configuration(c):
    # apex e_3 over an equilateral base at height -c; then b_0 = c / (1 + c)
    rho = math.sqrt(1 - c * c)
    base = [
        [rho * math.cos(a), rho * math.sin(a), -c] for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)
    ]
    return Configuration([[0.0, 0.0, 1.0]] + base)


def test_barycentric_small_weight_has_strict_margins():
    cfg = _apex_configuration(0.05 / 0.95)
    geo = simplex_geometry(cfg)
    assert geo.b[0] == pytest.approx(0.05, abs=1e-12)
    idx, m1, m2, b = barycentric_margins(cfg)
    assert 0 in idx
    k = list(idx).index(0)
    assert m1[k] == pytest.approx(1 / 3 - 0.05 / 0.95, abs=1e-12)
    assert m2[k] == pytest.approx(1 - 3 * 0.05 / 0.95, abs=1e-12)
    assert np.all(m1 > 0) and np.all(m2 > 0)


def test_barycentric_regular_is_tight():
    for d in range(2, 7):
        _, m1, m2, _ = barycentric_margins(regular_simplex(d))
        assert np.max(np.abs(np.concatenate([m1, m2]))) <= 1e-13


def test_interior_bounds_regular_simplex_tight():
    v = oracle_interior_bounds(riesz_kernel(1), 3, samples=3, seed=0)
    assert v.passed
    assert v.tight_margin <= 1e-9


def test_interior_bounds_random_gauss():
    v = oracle_interior_bounds(gaussian_kernel(1), 2, samples=20, seed=5)
    assert v.passed
    assert v.strict_checked == 40 and v.strict_failures == 0
    assert v.worst_margin <= 1e-9  # the regular simplex attains the first bound


def test_hemisphere_mode():
    v = oracle_interior_bounds(gaussian_kernel(1), 3, samples=10, hemisphere=True)
    assert v.lemma_id == "hemisphere"
    assert v.passed
    assert v.worst_margin > 0


def test_bounds_precondition():
    with pytest.raises(PreconditionError):
        oracle_interior_bounds(riesz_kernel(-3), 2, samples=2)


def test_verdict_json_is_byte_stable():
    a = oracle_g_inequality(log_kernel(), 3, samples=300, seed=9).dumps()
    b = oracle_g_inequality(log_kernel(), 3, samples=300, seed=9).dumps()
    assert a == b
    c = oracle_g_inequality(log_kernel(), 3, samples=300, seed=10).dumps()
    assert a != c
    obj = json.loads(a)
    assert obj["lemma_id"] == "g_q" and obj["passed"] is True


def test_bounds_verdict_deterministic():
    a = oracle_interior_bounds(gaussian_kernel(2), 2, samples=4, seed=3).dumps()
    b = oracle_interior_bounds(gaussian_kernel(2), 2, samples=4, seed=3).dumps()
    assert a == b


def test_run_oracle_dispatch():
    assert set(LEMMAS) == {"g_q", "u", "barycentric", "bounds", "hemisphere"}
    assert run_oracle("u", riesz_kernel(2), 2, None, 0).lemma_id == "u"
    assert run_oracle("barycentric", None, 2, 20, 0).samples == 21
    with pytest.raises(InvalidParameterError):
        run_oracle("nope", riesz_kernel(1), 2, None, 0)
