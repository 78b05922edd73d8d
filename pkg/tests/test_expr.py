import math

import pytest

from sldet.errors import ExprEvalError, ExprSyntaxError, InputError
from sldet.expr import parse_expr, tokenize

# ----------------------
# Evaluation
# ----------------------
@pytest.mark.parametrize("src,x,expected", [
    ("x^2 - 1/4", 2.0, 3.75),
    ("2*x^2", 3.0, 18.0),
    ("-x^2", 2.0, -4.0),
    ("2^3^2", 0.0, 512.0),
    ("2^-1", 0.0, 0.5),
    ("(1 + x) * (1 - x)", 0.5, 0.75),
    ("10 - 4 - 3", 0.0, 3.0),
    ("8 / 4 / 2", 0.0, 1.0),
    ("1.5e2 + .5", 0.0, 150.5),
    ("abs(-x) + sqrt(4)", 3.0, 5.0),
])
def test_evaluate(src, x, expected):
    assert parse_expr(src)(x) == pytest.approx(expected)


def test_trig_potential():
    q = parse_expr("(pi^2/4)*(3*cot(pi*x)^2 + 2)")
    assert q(0.5) == pytest.approx(math.pi ** 2 / 2.0, rel=1e-12)
    assert q(0.25) == pytest.approx(math.pi ** 2 / 4.0 * 5.0, rel=1e-12)


def test_functions():
    f = parse_expr("sin(x) + cos(x) + tan(x) + sinh(x) + cosh(x) + exp(x) + log(x)")
    x = 0.7
    expected = (math.sin(x) + math.cos(x) + math.tan(x) + math.sinh(x) + math.cosh(x)
                + math.exp(x) + math.log(x))
    assert f(x) == pytest.approx(expected, rel=1e-14)


def test_parsed_keeps_source():
    assert parse_expr("x + 1").source == "x + 1"

# ----------------------
# Errors
# ----------------------
def test_trailing_operator_reports_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("x +")
    assert info.value.position == 3
    assert "number" in info.value.expected


@pytest.mark.parametrize("src,position", [
    ("(x + 1", 6),
    ("x $ 1", 2),
    ("y + 1", 0),
    ("2 x", 2),
    ("sin x", 4),
])
def test_syntax_errors(src, position):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(src)
    assert info.value.position == position


def test_offsets_are_in_bytes():
    tokens = tokenize("x+1")
    assert [t.offset for t in tokens] == [0, 1, 2, 3]
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("µ + x")
    assert info.value.position == 0
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("1 + µ")
    assert info.value.position == 4


@pytest.mark.parametrize("src,x", [
    ("1/x", 0.0),
    ("log(x)", -1.0),
    ("sqrt(x)", -2.0),
    ("x^0.5", -4.0),
    ("cot(x)", 0.0),
    ("exp(x)", 1000.0),
])
def test_evaluation_errors_carry_x(src, x):
    with pytest.raises(ExprEvalError) as info:
        parse_expr(src)(x)
    assert info.value.x == x
    assert isinstance(info.value, InputError)
