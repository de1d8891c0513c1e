import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarsimplex.extended import ExtendedReal, esum

finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False)
INF = ExtendedReal.inf()


def test_finite_plus_finite_is_finite():
    assert ExtendedReal(1.5) + 2.0 == ExtendedReal(3.5)
    assert (ExtendedReal(1.5) + 2.0).is_finite


@given(finite)
def test_addition_saturates(x):
    assert (INF + x).is_posinf
    assert (x + INF).is_posinf
    assert (ExtendedReal.inf(-1) + x).is_neginf


@given(finite)
def test_infinity_dominates_every_finite_value(x):
    assert INF > x
    assert ExtendedReal(x) < INF
    assert ExtendedReal.inf(-1) < x


@given(finite, finite)
def test_order_matches_floats(a, b):
    assert (ExtendedReal(a) < ExtendedReal(b)) == (a < b)
    assert (ExtendedReal(a) == ExtendedReal(b)) == (a == b)


def test_opposite_infinities_never_cancel():
    with pytest.raises(ArithmeticError):
        INF + ExtendedReal.inf(-1)
    with pytest.raises(ArithmeticError):
        INF - INF


def test_nan_is_rejected():
    with pytest.raises(ArithmeticError):
        ExtendedReal(float("nan"))


def test_float_infinity_becomes_tagged():
    x = ExtendedReal(math.inf)
    assert x.is_posinf
    assert float(x) == math.inf
    with pytest.raises(ArithmeticError):
        x.value


def test_scalar_multiplication():
    assert (3 * ExtendedReal(2.0)).value == 6.0
    assert (2 * INF).is_posinf
    assert (-2 * INF).is_neginf
    with pytest.raises(ArithmeticError):
        0 * INF


@given(st.lists(finite, max_size=20))
def test_esum_of_finite_values(xs):
    assert esum(xs).value == pytest.approx(math.fsum(xs), rel=1e-9, abs=1e-3)


def test_esum_with_an_infinite_term():
    assert esum([1.0, INF, -5.0]).is_posinf


@given(finite)
def test_json_round_trip(x):
    assert ExtendedReal.from_json(ExtendedReal(x).to_json()) == ExtendedReal(x)


def test_json_infinities_are_strings():
    assert INF.to_json() == "+inf"
    assert ExtendedReal.inf(-1).to_json() == "-inf"
    assert ExtendedReal.from_json("+inf").is_posinf
    with pytest.raises(ValueError):
        ExtendedReal.from_json("lots")
