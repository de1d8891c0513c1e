import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarsimplex.errors import DomainError, InvalidParameterError
from polarsimplex.kernels import (
    affine_kernel,
    builtin_kernels,
    check_continuity_at_zero,
    classify_kernel,
    g_transform,
    gaussian_kernel,
    log_kernel,
    parse_kernel_spec,
    riesz_kernel,
    shifted_riesz_kernel,
    u_function,
    u_values,
)


@pytest.mark.parametrize(
    "kernel, t, expected",
    [
        (riesz_kernel(1), 4.0, 0.5),
        (riesz_kernel(-3), 0.0, 0.0),
        (log_kernel(), 1.0, 0.0),
        (log_kernel(), 4.0, -math.log(2.0)),
        (gaussian_kernel(1), 0.0, 1.0),
        (gaussian_kernel(1), 4.0, math.exp(-4.0)),
        (gaussian_kernel(2), 1.0, math.exp(-2.0)),
        (shifted_riesz_kernel(2, 1), 0.0, 1.0),
        (shifted_riesz_kernel(2, 0), 4.0, 0.25),
    ],
)
def test_point_values(kernel, t, expected):
    assert kernel.eval(t).value == pytest.approx(expected, rel=1e-15, abs=1e-300)


@pytest.mark.parametrize("kernel", [riesz_kernel(1), log_kernel(), riesz_kernel(4)])
def test_singular_kernels_are_infinite_at_zero(kernel):
    assert kernel.eval(0.0).is_posinf
    assert kernel.values(np.array([0.0, 1.0]))[0] == np.inf


def test_shifted_minus_two_is_minus_t():
    k = shifted_riesz_kernel(-2, 0)
    t = np.linspace(0, 4, 9)
    np.testing.assert_allclose(k.values(t), -t, atol=1e-15)
    assert classify_kernel(k).deriv_shape == "affine"


@pytest.mark.parametrize(
    "factory",
    [
        lambda: riesz_kernel(0),
        lambda: riesz_kernel(float("nan")),
        lambda: gaussian_kernel(0),
        lambda: gaussian_kernel(-1),
        lambda: shifted_riesz_kernel(0, 1),
        lambda: shifted_riesz_kernel(2, -0.1),
    ],
)
def test_invalid_parameters(factory):
    with pytest.raises(InvalidParameterError):
        factory()


def test_domain_checks():
    k = riesz_kernel(1)
    with pytest.raises(DomainError):
        k.eval(4.1)
    with pytest.raises(DomainError):
        k.eval(-0.5)
    # tiny overshoots are clamped
    assert k.eval(4.0 + 1e-13).value == 0.5


def test_classification_riesz_one():
    c = classify_kernel(riesz_kernel(1))
    assert c.nonincreasing and c.convex_on_0_4
    assert c.deriv_shape == "concave"
    assert not c.f0_finite
    assert c.strictly_convex
    assert c.eligible_concave_theorem


def test_classification_riesz_minus_three():
    c = classify_kernel(riesz_kernel(-3))
    assert c.nonincreasing
    assert not c.convex_on_0_4
    assert c.deriv_shape == "convex"
    assert c.f0_finite
    assert not c.eligible_concave_theorem and not c.eligible_convex_theorem


@pytest.mark.parametrize(
    "kernel, shape",
    [
        (riesz_kernel(2), "concave"),
        (riesz_kernel(4), "concave"),
        (riesz_kernel(-1), "concave"),
        (log_kernel(), "concave"),
        (gaussian_kernel(1), "concave"),
        (gaussian_kernel(2), "concave"),
        (shifted_riesz_kernel(2, 0.5), "concave"),
        (affine_kernel(-2.0, 1.0), "affine"),
    ],
)
def test_derivative_shapes(kernel, shape):
    assert classify_kernel(kernel).deriv_shape == shape


def test_affine_kernel_is_not_strictly_convex():
    c = classify_kernel(affine_kernel())
    assert c.convex_on_0_4 and not c.strictly_convex


def test_classify_rejects_tiny_grid():
    with pytest.raises(InvalidParameterError):
        classify_kernel(log_kernel(), grid_n=10)


@pytest.mark.parametrize("kernel", builtin_kernels(), ids=lambda k: k.spec)
def test_analytic_derivative_matches_finite_difference(kernel):
    t = np.linspace(0.05, 3.95, 60)
    np.testing.assert_allclose(kernel.deriv(t), kernel.fd_deriv(t), rtol=1e-6, atol=1e-9)


def test_fd_fallback_is_used_without_analytic_derivative():
    base = gaussian_kernel(1)
    from polarsimplex.kernels import Kernel

    k = Kernel("custom", {}, base._func, base.f0)
    assert not k.has_analytic_derivative
    assert k.deriv(1.0) == pytest.approx(-math.exp(-1.0), rel=1e-7)


@pytest.mark.parametrize("kernel", builtin_kernels(), ids=lambda k: k.spec)
def test_continuity_at_zero(kernel):
    assert check_continuity_at_zero(kernel)


def test_g_transform_values():
    assert g_transform(riesz_kernel(1), -1.0).value == 0.5
    assert g_transform(riesz_kernel(1), 1.0).is_posinf
    assert g_transform(gaussian_kernel(1), 0.0).value == pytest.approx(math.exp(-2.0))
    with pytest.raises(DomainError):
        g_transform(log_kernel(), 1.5)


@pytest.mark.parametrize("kernel", builtin_kernels(), ids=lambda k: k.spec)
@pytest.mark.parametrize("d", [2, 3, 5])
def test_u_at_zero(kernel, d):
    assert u_function(kernel, d, 0.0).value == pytest.approx((d + 1) * kernel.eval(2.0).value)


def test_u_endpoints():
    k = riesz_kernel(1)
    assert u_function(k, 3, 1 / 3).value == pytest.approx(3.0980762113533159, rel=1e-14)
    assert u_function(k, 3, -1 / 3).is_posinf
    with pytest.raises(DomainError):
        u_function(k, 3, 0.5)


@settings(max_examples=50)
@given(st.floats(min_value=-0.5, max_value=0.5))
def test_u_vectorized_matches_scalar(t):
    k = gaussian_kernel(1)
    assert u_values(k, 2, np.array([t]))[0] == pytest.approx(u_function(k, 2, t).value, rel=1e-14)


def test_u_is_constant_for_affine_kernel():
    k = shifted_riesz_kernel(-2, 0)
    vals = u_values(k, 4, np.linspace(-0.25, 0.25, 101))
    np.testing.assert_allclose(vals, -2.0 - 2.0 * 4, atol=1e-13)


@pytest.mark.parametrize(
    "text, name, params",
    [
        ("riesz:s=1", "riesz", {"s": 1.0}),
        ("RIESZ:S=-3", "riesz", {"s": -3.0}),
        ("log", "log", {}),
        ("gauss:sigma=2", "gauss", {"sigma": 2.0}),
        ("sriesz:s=2,c=0.5", "sriesz", {"s": 2.0, "c": 0.5}),
        ("sriesz:s=-3", "sriesz", {"s": -3.0, "c": 0.0}),
    ],
)
def test_parse_kernel_spec(text, name, params):
    k = parse_kernel_spec(text)
    assert k.name == name
    assert k.params == params
    assert parse_kernel_spec(k.spec).params == params


@pytest.mark.parametrize("text", ["bogus", "riesz", "riesz:t=1", "gauss:sigma=x", "riesz:s"])
def test_parse_kernel_spec_errors(text):
    with pytest.raises(InvalidParameterError):
        parse_kernel_spec(text)


@pytest.mark.parametrize("kernel", builtin_kernels(), ids=lambda k: k.spec)
def test_derivative_accuracy_near_zero(kernel):
    t = np.geomspace(1e-4, 3.99, 200)
    analytic = kernel.deriv(t)
    assert np.all(np.abs(analytic - kernel.fd_deriv(t)) <= 1e-6 * (1 + np.abs(analytic)))


@pytest.mark.parametrize("kernel", builtin_kernels(), ids=lambda k: k.spec)
def test_g_transform_recovers_kernel(kernel):
    for tp in np.linspace(0.0, 4.0, 33):
        assert g_transform(kernel, 1.0 - tp / 2.0) == kernel.eval(tp)


@pytest.mark.parametrize(
    "s, shape",
    [
        (1.0, "concave"),
        (-1.0, "concave"),
        (-1.75, "concave"),
        (-2.0, "affine"),
        (-2.5, "convex"),
        (-3.75, "convex"),
        (-4.0, "affine"),
        (-4.5, "concave"),
    ],
)
def test_riesz_derivative_shape_regimes(s, shape):
    assert classify_kernel(riesz_kernel(s)).deriv_shape == shape
