import math
import random

import pytest

from snb.core.errors import DomainError, ExprSyntaxError, UnknownIdentifierError
from snb.core.expr_parser import (BinOp, Neg, Num, Var, differentiate, evaluate, evaluate_array,
                                  parse, to_string)


class TestParse:
    def test_precedence_of_unary_minus_and_power(self):
        tree = parse("-x^2 + nu").root
        assert tree == BinOp("+", Neg(BinOp("^", Var("x"), Num(2.0))), Var("nu"))

    def test_power_is_right_associative(self):
        assert parse("x^2^3").root == BinOp("^", Var("x"), BinOp("^", Num(2.0), Num(3.0)))

    def test_rational_model_like_tree(self):
        tree = parse("(-x^2 + nu)/(1 + 0.3*x)").root
        assert isinstance(tree, BinOp) and tree.op == "/"
        assert tree.right == BinOp("+", Num(1.0), BinOp("*", Num(0.3), Var("x")))

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError, match="unknown identifier mu"):
            parse("-x^2 + mu")

    def test_syntax_error_reports_position(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse("x + * nu")
        assert info.value.position == 4
        assert info.value.expected

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ExprSyntaxError):
            parse("(x + nu")

    @pytest.mark.parametrize("text", [
        "-x^2 + nu",
        "(-x^2 + nu)/(1 + 0.3*x)",
        "x - (nu - x)",
        "-(x + 1)^2",
        "exp(-x)*sin(nu) + 1e-3*x^3",
        "x/(nu/x)",
    ])
    def test_canonical_text_reparses_to_same_tree(self, text):
        e = parse(text)
        assert parse(to_string(e)) == e


class TestEvaluate:
    def test_fixed_point_of_normal_form(self):
        assert evaluate(parse("-x^2+nu"), 0.2, 0.04) == pytest.approx(0.0, abs=1e-16)
        assert evaluate(parse("-x^2+nu"), 0.0, 0.0) == 0.0

    def test_rational_model(self):
        value = evaluate(parse("(-x^2+nu)/(1+0.3*x)"), 1.0, 0.0)
        assert value == pytest.approx(-1.0 / 1.3, rel=1e-15)

    @pytest.mark.parametrize("text, x", [
        ("log(x)", -1.0),
        ("sqrt(x)", -0.5),
        ("1/x", 0.0),
        ("x^0.5", -0.25),
    ])
    def test_domain_errors(self, text, x):
        with pytest.raises(DomainError):
            evaluate(parse(text), x, 0.0)

    def test_array_evaluation_matches_scalar(self):
        e = parse("(-x^2+nu)/(1+0.3*x) + tanh(x)")
        xs = [-0.4, 0.0, 0.3, 1.0]
        values = evaluate_array(e, xs, 0.01)
        for x, value in zip(xs, values):
            assert value == pytest.approx(evaluate(e, x, 0.01), rel=1e-15)


class TestDifferentiate:
    def test_power_rule(self):
        d = differentiate(parse("-x^2 + nu"), "x")
        for x in (-0.3, 0.0, 0.7):
            assert evaluate(d, x, 0.05) == pytest.approx(-2.0 * x, abs=1e-15)

    def test_parameter_derivative(self):
        d = differentiate(parse("-x^2 + nu"), "nu")
        assert evaluate(d, 0.4, 0.02) == 1.0

    def test_exponential_product(self):
        d = differentiate(parse("exp(x)*nu"), "x")
        assert evaluate(d, 0.3, 0.07) == pytest.approx(math.exp(0.3) * 0.07, rel=1e-15)


def _random_expression(rng: random.Random, depth: int) -> str:
    if depth == 0 or rng.random() < 0.25:
        choice = rng.random()
        if choice < 0.4:
            return "x" if rng.random() < 0.5 else f"x^{rng.choice((2, 3))}"
        if choice < 0.6:
            return "nu"
        return f"{rng.uniform(-2.0, 2.0):.3f}"
    kind = rng.random()
    if kind < 0.6:
        op = rng.choice("+-*")
        return f"({_random_expression(rng, depth - 1)}) {op} ({_random_expression(rng, depth - 1)})"
    func = rng.choice(("sin", "cos", "tanh", "exp_tanh"))
    inner = _random_expression(rng, depth - 1)
    if func == "exp_tanh":
        return f"exp(tanh({inner}))"
    return f"{func}({inner})"


def _central_difference(fn, t: float, h: float) -> float:
    return (8.0 * (fn(t + h) - fn(t - h)) - (fn(t + 2 * h) - fn(t - 2 * h))) / (12.0 * h)


def test_derivatives_match_finite_differences_on_random_expressions():
    rng = random.Random(20240611)
    h = 1e-5
    for _ in range(100):
        e = parse(_random_expression(rng, 3))
        dx = differentiate(e, "x")
        dnu = differentiate(e, "nu")
        x = rng.uniform(-0.5, 1.0)
        nu = rng.uniform(0.0, 0.1)

        fd_x = _central_difference(lambda t: evaluate(e, t, nu), x, h)
        fd_nu = _central_difference(lambda t: evaluate(e, x, t), nu, h)
        assert abs(evaluate(dx, x, nu) - fd_x) <= 1e-5 * max(1.0, abs(fd_x)), to_string(e)
        assert abs(evaluate(dnu, x, nu) - fd_nu) <= 1e-5 * max(1.0, abs(fd_nu)), to_string(e)
