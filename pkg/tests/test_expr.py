import math

import pytest
from hypothesis import given, settings, strategies as st

from t2geom import expr as ex
from t2geom.errors import ParseError, VariableIndexError


def test_monomial_evaluates():
    node = ex.parse_expression("y2_1^2", 1)
    assert ex.evaluate(node, [0.0], [0.0], [3.0]) == 9.0


def test_conformal_example_matches_direct_formula():
    node = ex.parse_expression("exp(2*x_1)*(y2_1 + y1_1^2/2)^2", 1)
    x, v, w = 0.3, -1.2, 0.7
    assert ex.evaluate(node, [x], [v], [w]) == pytest.approx(math.exp(2 * x) * (w + v * v / 2) ** 2, rel=1e-15)


@pytest.mark.parametrize("src", ["y3_1", "z_1", "y2_1 +", "(x_1", "x_1 ** 2", "x_1^y1_1", "2 $ x_1", ""])
def test_parse_errors(src):
    with pytest.raises(ParseError):
        ex.parse_expression(src, 1)


def test_unknown_class_is_index_or_parse_error():
    with pytest.raises((IndexError, ParseError)):
        ex.parse_expression("y3_1", 1)


@pytest.mark.parametrize("src", ["x_2", "y1_0", "y2_3"])
def test_index_out_of_range(src):
    with pytest.raises(VariableIndexError):
        ex.parse_expression(src, 2 if src != "x_2" else 1)


def test_error_carries_position():
    with pytest.raises(ParseError) as info:
        ex.parse_expression("x_1 + foo", 1)
    assert info.value.position == 6


def test_named_parameters():
    node = ex.parse_expression("a*y2_1^2 + b", 1, {"a": 2.0, "b": 0.5})
    assert ex.evaluate(node, [0.0], [0.0], [3.0]) == 18.5


def test_negative_and_fractional_exponents():
    node = ex.parse_expression("x_1^-2 + x_1^0.5", 1)
    assert ex.evaluate(node, [4.0]) == pytest.approx(1 / 16 + 2)


def test_precedence():
    assert ex.evaluate(ex.parse_expression("-2^2 + 3*4/2 - 1", 1), [0.0]) == pytest.approx(1.0)


def test_variables_listed():
    node = ex.parse_expression("x_1*y1_2 + sin(y2_1)", 2)
    assert ex.variables(node) == {("x", 1), ("y1", 2), ("y2", 1)}


def test_symbolic_derivative():
    node = ex.parse_expression("x_1^3*sin(x_2)", 2)
    d = ex.differentiate(node, "x", 1)
    assert ex.evaluate(d, [0.5, 1.1]) == pytest.approx(3 * 0.25 * math.sin(1.1))


def test_substitute():
    node = ex.parse_expression("x_1^2", 1)
    sub = ex.substitute(node, {("x", 1): ex.parse_expression("x_1 + 1", 1)})
    assert ex.evaluate(sub, [2.0]) == 9.0


# -- round trip: random ASTs -> source -> AST evaluate identically -------------------

_leaf = st.one_of(
    st.sampled_from(["x_1", "x_2", "y1_1", "y1_2", "y2_1", "y2_2"]),
    st.integers(0, 9).map(str),
    st.floats(0.1, 5.0).map(lambda v: f"{v:.3f}"),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*"), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(children, st.integers(1, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda c: f"-{c}"),
    )


sources = st.recursive(_leaf, _combine, max_leaves=8)


@settings(max_examples=150, deadline=None)
@given(sources)
def test_round_trip(src):
    node = ex.parse_expression(src, 2)
    again = ex.parse_expression(ex.to_source(node), 2)
    args = ([0.3, -0.4], [0.2, 0.5], [-0.1, 0.25])
    a, b = ex.evaluate(node, *args), ex.evaluate(again, *args)
    if math.isfinite(a):
        assert b == pytest.approx(a, rel=1e-12, abs=1e-12)
    assert ex.to_source(again) == ex.to_source(node)
