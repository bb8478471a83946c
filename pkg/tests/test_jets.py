import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from actionnet import jets
from actionnet.jets import Jet, Jet1, Jet2, JetEvaluationError, lift_const, seed_input

finite = st.floats(-3.0, 3.0, allow_nan=False)
positive = st.floats(0.1, 5.0)


def fd(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


# -- examples ----------------------------------------------------------------

def test_sqrt_one_plus_square_at_one():
    x = seed_input(1.0)
    r = jets.sqrt(1.0 + jets.square(x))
    assert r.value == pytest.approx(math.sqrt(2))
    assert r.d_dx == pytest.approx(1 / math.sqrt(2))


def test_tanh_at_one():
    r = jets.tanh(seed_input(1.0))
    assert r.value == pytest.approx(math.tanh(1.0))
    assert r.d_dx == pytest.approx(1 - math.tanh(1.0) ** 2)


def test_product_rule_two_variables():
    x, y = seed_input(2.0, 0, 2), seed_input(3.0, 1, 2)
    r = x * y + x / y
    assert r.value == pytest.approx(6 + 2 / 3)
    assert r.d_dx == pytest.approx(3 + 1 / 3)
    assert r.d_dy == pytest.approx(2 - 2 / 9)


def test_constants_have_zero_partials():
    c = lift_const(4.0, arity=2)
    assert c.partials == (0.0, 0.0)
    assert jets.exp(c).partials == (0.0, 0.0)


def test_jet_constructors():
    assert Jet1(1.5, 2.0).partials == (2.0,)
    assert Jet2(1.5, 2.0, -1.0).d_dy == -1.0


def test_array_components_broadcast():
    x = seed_input(np.array([0.0, 1.0, 2.0]))
    r = jets.square(x) * 3.0
    np.testing.assert_allclose(r.value, [0, 3, 12])
    np.testing.assert_allclose(r.d_dx, [0, 6, 12])


def test_ndarray_times_jet_defers_to_jet():
    r = np.array([2.0, 3.0]) * seed_input(np.array([1.0, 1.0]))
    assert isinstance(r, Jet)
    np.testing.assert_allclose(r.d_dx, [2, 3])


# -- errors ------------------------------------------------------------------

def test_division_by_zero_raises():
    with pytest.raises(JetEvaluationError):
        seed_input(1.0) / lift_const(0.0)
    with pytest.raises(JetEvaluationError):
        1.0 / seed_input(0.0)


def test_sqrt_at_zero_reports_index():
    with pytest.raises(JetEvaluationError) as info:
        jets.sqrt(seed_input(np.array([1.0, 0.0, 2.0])))
    assert info.value.index == 1


def test_sqrt_negative_plain_number():
    with pytest.raises(JetEvaluationError):
        jets.sqrt(-1.0)
    assert jets.sqrt(0.0) == 0.0


def test_mismatched_arity():
    with pytest.raises(ValueError):
        seed_input(1.0, 0, 1) + seed_input(1.0, 0, 2)


def test_invalid_seed_axis():
    with pytest.raises(ValueError):
        seed_input(1.0, which=2, arity=2)


# -- properties --------------------------------------------------------------

@given(finite)
def test_composite_matches_finite_difference(x):
    def f(v):
        return jets.tanh(v) * jets.exp(0.5 * v) + jets.sqrt(1.0 + jets.square(v)) / (2.0 + jets.square(v))

    r = f(seed_input(x))
    assert r.value == pytest.approx(f(x), rel=1e-12, abs=1e-12)
    assert r.d_dx == pytest.approx(fd(f, x), rel=1e-6, abs=1e-7)


@given(finite, positive)
def test_quotient_rule(a, b):
    r = seed_input(a, 0, 2) / seed_input(b, 1, 2)
    assert r.d_dx == pytest.approx(1 / b)
    assert r.d_dy == pytest.approx(-a / b ** 2)


@given(finite, finite)
def test_linearity_of_partials(a, b):
    x = seed_input(a)
    lhs = 2.0 * jets.tanh(x) - 3.0 * jets.square(x) + b
    assert lhs.d_dx == pytest.approx(2 * (1 - math.tanh(a) ** 2) - 6 * a, abs=1e-12)


@given(st.lists(finite, min_size=1, max_size=8))
def test_vectorised_equals_scalar(xs):
    arr = jets.sqrt(1.0 + jets.square(seed_input(np.array(xs))))
    for i, x in enumerate(xs):
        s = jets.sqrt(1.0 + jets.square(seed_input(x)))
        assert arr.value[i] == pytest.approx(s.value)
        assert arr.d_dx[i] == pytest.approx(s.d_dx)
