from __future__ import annotations

import random

import pytest

from exmo.errors import ModelSyntaxError
from exmo.exprs import Expr, parse_expr


def test_normalizes_spacing():
    assert parse_expr("pc>=pE+s").text == "pc >= pE + s"


def test_evaluates_arithmetic():
    expr = parse_expr("a + 2 * b - 1")
    assert expr.evaluate({"a": 3, "b": 4}) == 10


def test_evaluates_comparison():
    expr = parse_expr("pc >= pE + s")
    assert expr.evaluate({"pc": 100, "pE": 5, "s": 50}) is True
    assert expr.evaluate({"pc": 54, "pE": 5, "s": 50}) is False


def test_unary_minus():
    assert parse_expr("-x + 3").evaluate({"x": 5}) == -2


def test_names_and_sides():
    expr = parse_expr("v0 + c1 >= v1")
    assert expr.names == frozenset({"v0", "c1", "v1"})
    assert expr.is_comparison
    assert expr.sides() == ("v0 + c1", ">=", "v1")


def test_sides_of_plain_expression_is_none():
    assert parse_expr("v0 + 1").sides() is None
    assert not parse_expr("v0 + 1").is_comparison


@pytest.mark.parametrize("bad", [
    "x / 2", "x and y", "f(x)", "x < y < z", "1.5", "'s'", "x | y",
    "[1, 2]", "x if y else z", "",
])
def test_rejects_unsupported_syntax(bad):
    with pytest.raises(ModelSyntaxError):
        parse_expr(bad)


def test_unknown_name_raises_key_error():
    with pytest.raises(KeyError):
        Expr("missing + 1").evaluate({})


def _random_expr(rng: random.Random, depth: int) -> str:
    if depth == 0:
        return rng.choice(["a", "b", "c", str(rng.randint(0, 9))])
    left = _random_expr(rng, depth - 1)
    right = _random_expr(rng, depth - 1)
    return f"({left} {rng.choice(['+', '-', '*'])} {right})"


def test_random_expressions_match_python_eval():
    rng = random.Random(4821)
    scope = {"a": 2, "b": -3, "c": 7}
    for _ in range(300):
        source = _random_expr(rng, rng.randint(1, 3))
        if rng.random() < 0.5:
            op = rng.choice(["<", "<=", "==", "!=", ">=", ">"])
            source = f"{source} {op} {_random_expr(rng, 1)}"
        assert parse_expr(source).evaluate(scope) == eval(source, {}, scope)
