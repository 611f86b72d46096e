import math

import pytest

from loxokit import expr as ex
from loxokit.verify import random_expression


def central_difference(e, name, point, h=1e-5):
    up = dict(point)
    dn = dict(point)
    up[name] += h
    dn[name] -= h
    return (ex.evaluate(e, up) - ex.evaluate(e, dn)) / (2.0 * h)


class TestParse:
    def test_structural_example(self):
        e = ex.parse("2/(1+x^2+y^2)")
        assert isinstance(e, ex.Bin) and e.op == "/"
        assert ex.depth(e) == 4

    def test_single_variable(self):
        assert ex.parse("x") == ex.Var("x")

    def test_syntax_error_offset(self):
        with pytest.raises(ex.ExprSyntaxError) as err:
            ex.parse("exp(")
        assert err.value.offset == 4

    def test_unknown_identifier(self):
        with pytest.raises(ex.ExprSyntaxError) as err:
            ex.parse("2*foo + 1")
        assert err.value.offset == 2

    def test_unknown_function(self):
        with pytest.raises(ex.ExprSyntaxError):
            ex.parse("tan(x)")

    def test_empty(self):
        with pytest.raises(ex.ExprSyntaxError):
            ex.parse("   ")

    def test_constants_fold(self):
        assert ex.parse("pi") == ex.Num(math.pi)
        assert ex.parse("e") == ex.Num(math.e)

    def test_precedence(self):
        # ^ binds above unary minus, which binds above * /
        assert ex.evaluate(ex.parse("-x^2"), {"x": 2.0}) == -4.0
        assert ex.evaluate(ex.parse("2*x^2"), {"x": 3.0}) == 18.0
        # left association within a tier
        assert ex.evaluate(ex.parse("8/4/2"), {}) == 1.0
        assert ex.parse("2^3^2") == ex.Num(64.0)

    def test_exponent_must_be_constant(self):
        with pytest.raises(ex.ExprSyntaxError):
            ex.parse("x^y")
        assert ex.parse("x^(1+1)") == ex.Bin("^", ex.Var("x"), ex.Num(2.0))

    def test_print_parse_roundtrip_random(self, rng):
        for _ in range(200):
            e = random_expression(rng)
            assert ex.parse(ex.to_text(e)) == e


class TestEvaluate:
    def test_basic(self):
        assert ex.evaluate(ex.parse("2/(1+x^2+y^2)"), (0.0, 0.0)) == 2.0

    def test_exp_one(self):
        assert ex.evaluate(ex.parse("exp(1)"), {}) == math.e

    def test_log_domain_error(self):
        with pytest.raises(ex.DomainError):
            ex.evaluate(ex.parse("log(x)"), (0.0, 0.0))

    def test_sqrt_domain_error(self):
        with pytest.raises(ex.DomainError):
            ex.evaluate(ex.parse("sqrt(x)"), {"x": -1.0})

    def test_division_by_zero(self):
        with pytest.raises(ex.DomainError):
            ex.evaluate(ex.parse("1/x"), {"x": 0.0})

    def test_overflow_is_domain_error(self):
        with pytest.raises(ex.DomainError):
            ex.evaluate(ex.parse("exp(x)"), {"x": 1e6})


class TestDifferentiate:
    def test_power_rule(self):
        assert ex.differentiate(ex.parse("x^2"), "x") == ex.Bin("*", ex.Num(2.0), ex.Var("x"))

    def test_independent_variable(self):
        assert ex.differentiate(ex.parse("sin(y)"), "x") == ex.Num(0.0)

    def test_against_central_difference(self, rng):
        # independent oracle: order-2 finite differences at random points
        cases = 0
        while cases < 20:
            e = random_expression(rng)
            name = "x" if rng.random() < 0.5 else "y"
            pt = {"x": float(rng.uniform(-1, 1)), "y": float(rng.uniform(-1, 1))}
            try:
                sym = ex.evaluate(ex.differentiate(e, name), pt)
                fd = central_difference(e, name, pt)
            except ex.DomainError:
                continue
            assert abs(sym - fd) < 1e-6 * (1.0 + abs(sym))
            cases += 1

    def test_linearity(self, rng):
        for _ in range(40):
            e1 = random_expression(rng)
            e2 = random_expression(rng)
            al, be = float(rng.normal()), float(rng.normal())
            comb = ex.add(ex.mul(ex.num(al), e1), ex.mul(ex.num(be), e2))
            pt = {"x": float(rng.uniform(-1, 1)), "y": float(rng.uniform(-1, 1))}
            try:
                lhs = ex.evaluate(ex.differentiate(comb, "x"), pt)
                rhs = (al * ex.evaluate(ex.differentiate(e1, "x"), pt)
                       + be * ex.evaluate(ex.differentiate(e2, "x"), pt))
            except ex.DomainError:
                continue
            assert abs(lhs - rhs) < 1e-12

    def test_mixed_partials_commute(self, rng):
        for _ in range(40):
            e = random_expression(rng)
            pt = {"x": float(rng.uniform(-1, 1)), "y": float(rng.uniform(-1, 1))}
            try:
                xy = ex.evaluate(ex.differentiate(ex.differentiate(e, "x"), "y"), pt)
                yx = ex.evaluate(ex.differentiate(ex.differentiate(e, "y"), "x"), pt)
            except ex.DomainError:
                continue
            assert abs(xy - yx) < 1e-12

    def test_closure_over_grammar(self, rng):
        for _ in range(50):
            e = random_expression(rng)
            d = ex.differentiate(e, "x")
            assert isinstance(d, (ex.Num, ex.Var, ex.Neg, ex.Bin, ex.Call))


class TestSubstitute:
    def test_composition(self):
        e = ex.parse("x^2 + y")
        sub = ex.substitute(e, {"x": ex.parse("t"), "y": ex.parse("t^3")})
        assert ex.evaluate(sub, {"t": 2.0}) == 12.0

    def test_chain_rule_through_substitution(self):
        e = ex.substitute(ex.parse("sin(x)"), {"x": ex.parse("t^2")})
        d = ex.differentiate(e, "t")
        t = 0.7
        assert abs(ex.evaluate(d, {"t": t}) - 2 * t * math.cos(t * t)) < 1e-14
