import math

import numpy as np
import pytest

from polarsimplex.errors import InvalidParameterError
from polarsimplex.geometry import (
    Configuration,
    geodesic_perturb,
    pairwise_dot_deviation,
    regular_simplex,
)
from polarsimplex.kernels import gaussian_kernel, riesz_kernel, shifted_riesz_kernel
from polarsimplex.polarization import (
    _config_gradients,
    _run_start,
    hemisphere_bound,
    maximize_polarization,
    simplex_value,
)
from polarsimplex.potential import SolverOptions, potential_values


def test_hemisphere_bound_examples():
    assert hemisphere_bound(riesz_kernel(1), 3).value == pytest.approx(3.0980762113533159)
    assert hemisphere_bound(gaussian_kernel(1), 2).value == pytest.approx(0.7540745212316188)
    assert hemisphere_bound(shifted_riesz_kernel(-2, 0), 2).value == pytest.approx(-6.0)
    with pytest.raises(InvalidParameterError):
        hemisphere_bound(riesz_kernel(1), 1)


def test_simplex_value():
    assert simplex_value(riesz_kernel(1), 2) == 2.5
    # role reversal: the vertex formula is the minimum
    assert simplex_value(riesz_kernel(-3), 3) == pytest.approx(-13.063945294843617)


def test_config_gradients_match_finite_differences(rng):
    k = gaussian_kernel(1.5)
    d = 3
    v = rng.standard_normal((d + 1, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    xs = rng.standard_normal((2, d))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    g = _config_gradients(k, v, xs)
    h = 1e-6
    for i in range(d + 1):
        tang = rng.standard_normal(d)
        tang -= (tang @ v[i]) * v[i]
        plus, minus = v.copy(), v.copy()
        plus[i] = (v[i] + h * tang) / np.linalg.norm(v[i] + h * tang)
        minus[i] = (v[i] - h * tang) / np.linalg.norm(v[i] - h * tang)
        fd = (
            potential_values(k, Configuration(plus), xs)
            - potential_values(k, Configuration(minus), xs)
        ) / (2 * h)
        np.testing.assert_allclose(g[:, i, :] @ tang, fd, rtol=1e-6, atol=1e-9)


def test_riesz_triangle():
    res = maximize_polarization(riesz_kernel(1), 2, SolverOptions(starts=3, seed=1))
    assert res.best_value.value == pytest.approx(2.5, abs=1e-9)
    assert res.best_value.value <= 2.5 + 1e-12
    assert pairwise_dot_deviation(res.best_config) <= 1e-6
    assert abs(res.gap_to_simplex) <= 1e-9
    assert res.starts_used == 3
    assert res.start_kinds == ["random", "perturbed", "hemisphere"]


def test_gauss_triangle_every_start():
    res = maximize_polarization(gaussian_kernel(1), 2, SolverOptions(starts=3, seed=4))
    target = math.exp(-4) + 2 * math.exp(-1)
    assert all(abs(v - target) <= 1e-9 for v in res.start_values)
    assert all(v <= target + 1e-12 for v in res.start_values)


def test_trace_ends_on_best():
    res = maximize_polarization(gaussian_kernel(1), 2, SolverOptions(starts=2, seed=0))
    assert len(res.trace) >= 2
    # the trace ends on the running best
    assert res.trace[-1] == pytest.approx(max(res.trace))
    assert res.trace[-1] == pytest.approx(res.best_value.value, abs=1e-12)


def test_flat_landscape():
    # f(t) = -t: every centered configuration is optimal
    res = maximize_polarization(shifted_riesz_kernel(-2, 0), 2, SolverOptions(starts=1, seed=0))
    assert res.best_value.value == pytest.approx(-6.0, abs=1e-6)
    assert abs(res.gap_to_simplex) <= 1e-6
    assert np.linalg.norm(res.best_config.points.sum(axis=0)) <= 1e-5


def test_result_json_round_trip():
    res = maximize_polarization(riesz_kernel(1), 2, SolverOptions(starts=1))
    obj = res.to_json()
    assert obj["starts_used"] == 1
    again = Configuration.from_json(obj["best_config"])
    np.testing.assert_allclose(again.points, res.best_config.points)


def test_invalid_arguments():
    with pytest.raises(InvalidParameterError):
        maximize_polarization(riesz_kernel(1), 1)
    with pytest.raises(InvalidParameterError):
        maximize_polarization(riesz_kernel(1), 2, SolverOptions(starts=0))


def test_never_exceeds_simplex_value_d3():
    res = maximize_polarization(riesz_kernel(2), 3, SolverOptions(starts=2, seed=2))
    assert res.best_value.value <= 2.5 + 1e-9
    assert res.best_value.value == pytest.approx(2.5, abs=1e-6)
    assert pairwise_dot_deviation(res.best_config) <= 1e-3


@pytest.mark.slow
def test_recovers_simplex_from_perturbed_start():
    rng = np.random.default_rng(8)
    for k in (gaussian_kernel(1), riesz_kernel(1)):
        v0 = geodesic_perturb(regular_simplex(3).points, rng, 0.2)
        v, value = _run_start(k, v0, 1e-12, 0, [])
        assert value == pytest.approx(simplex_value(k, 3), abs=1e-8)
        assert pairwise_dot_deviation(Configuration(v)) <= 1e-3
