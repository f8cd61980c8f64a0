import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from t2geom import jetscalar as js
from t2geom.jetscalar import Jet


def univariate(v, order=4):
    return Jet.variable(v, 0, 1, order)


def derivs(j, order=4):
    return [float(j.partial((0,) * k)) for k in range(order + 1)]


@pytest.mark.parametrize(
    "f, df",
    [
        (js.exp, lambda v: [math.exp(v)] * 5),
        (js.sin, lambda v: [math.sin(v), math.cos(v), -math.sin(v), -math.cos(v), math.sin(v)]),
        (js.cos, lambda v: [math.cos(v), -math.sin(v), -math.cos(v), math.sin(v), math.cos(v)]),
        (js.log, lambda v: [math.log(v), 1 / v, -1 / v**2, 2 / v**3, -6 / v**4]),
        (
            js.sqrt,
            lambda v: [v**0.5, 0.5 * v**-0.5, -0.25 * v**-1.5, 0.375 * v**-2.5, -0.9375 * v**-3.5],
        ),
    ],
)
def test_elementary_derivatives(f, df):
    v = 0.7
    assert derivs(f(univariate(v))) == pytest.approx(df(v), rel=1e-13)


def test_floats_pass_through():
    assert js.exp(0.0) == 1.0
    assert js.divide(1.0, 4.0) == 0.25


def test_monomial_fourth_derivative():
    j = univariate(1.0) ** 4
    assert float(j.partial((0, 0, 0, 0))) == pytest.approx(24.0)


def test_mixed_partials():
    x = Jet.variable(0.5, 0, 2, 3)
    y = Jet.variable(-1.5, 1, 2, 3)
    f = x * x * y + js.sin(x * y)
    # d²f/dx dy = 2x + cos(xy) − xy sin(xy)
    want = 2 * 0.5 + math.cos(-0.75) + 0.75 * math.sin(-0.75)
    assert float(f.partial((0, 1))) == pytest.approx(want, rel=1e-14)


def test_batch_variable_matches_scalar():
    vals = np.array([0.1, 0.4, 1.3])
    batch = js.exp(Jet.variable(vals, 0, 1, 3) * 2.0)
    for i, v in enumerate(vals):
        single = js.exp(univariate(v, 3) * 2.0)
        assert batch.coef[i] == pytest.approx(single.coef)


def test_division_and_reciprocal():
    x = univariate(2.0)
    assert derivs(1.0 / x) == pytest.approx([0.5, -0.25, 0.25, -0.375, 0.75])


def test_inverse_of_matrix_jet():
    x = Jet.variable(0.3, 0, 1, 2)
    m = Jet.coerce_array([[2.0 + x, x], [x, 1.0]], 1, 2)
    inv = js.inverse(m)
    prod = js.matmul(m, inv)
    assert np.array(prod.value) == pytest.approx(np.eye(2))
    assert np.abs(prod.derivative(0).coef).max() < 1e-14


def test_order_limit_enforced():
    with pytest.raises(ValueError):
        univariate(1.0, 2).partial((0, 0, 0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-2.0, 2.0))
def test_product_rule_property(a, b):
    x = univariate(a)
    f, g = js.log(x), js.sin(x * b)
    lhs = derivs(f * g)
    fd, gd = derivs(f), derivs(g)
    rhs = [sum(math.comb(k, i) * fd[i] * gd[k - i] for i in range(k + 1)) for k in range(5)]
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)
