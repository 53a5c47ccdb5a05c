import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtransport.expr import (ExprArityError, ExprDomainError, ExprSyntaxError, TransportProblem,
                             check_constraint, eval_expr, evaluate, parse_expr, to_text, variables)


def test_parse_shifted_coordinate():
    assert eval_expr(parse_expr("x2 - 0.5"), [0.25, 0.75], 0.0) == 0.25


def test_parse_time_dependent_field():
    e = parse_expr("-(1)*(x1 - 0.5 - 1.6*t)")
    assert "t" in variables(e)
    assert eval_expr(e, [0.7, 0.1], 0.5) == pytest.approx(-(0.7 - 0.5 - 0.8))


def test_unbalanced_paren_reports_end_offset():
    text = "sin(2*pi*x1"
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert info.value.offset == len(text)


def test_unknown_identifier_and_arity():
    with pytest.raises(ExprSyntaxError):
        parse_expr("foo(x1)")
    with pytest.raises(ExprArityError):
        parse_expr("sin()")
    with pytest.raises(ExprArityError):
        parse_expr("exp(x1, x2)")


def test_constant_expression():
    assert eval_expr(parse_expr("exp(-1/3)"), [0.0], 0.0) == pytest.approx(0.7165313105737893, abs=1e-15)


def test_domain_errors():
    with pytest.raises(ExprDomainError):
        eval_expr(parse_expr("1/ (x1-x1)"), [0.3], 0.0)
    with pytest.raises(ExprDomainError):
        eval_expr(parse_expr("ln(x1 - 1)"), [0.3], 0.0)
    with pytest.raises(ExprDomainError):
        eval_expr(parse_expr("sqrt(-1)"), [0.3], 0.0)


def test_precedence():
    assert eval_expr(parse_expr("-2^2"), [0.0], 0) == -4.0
    assert eval_expr(parse_expr("2^3^2"), [0.0], 0) == 512.0
    assert eval_expr(parse_expr("1 - 2 - 3"), [0.0], 0) == -4.0
    assert eval_expr(parse_expr("8 / 4 / 2"), [0.0], 0) == 1.0
    assert eval_expr(parse_expr("2 * 3 + 4 * 5"), [0.0], 0) == 26.0


def test_vectorized_evaluation_matches_scalar():
    e = parse_expr("sin(2*pi*x1)*cos(x2) + abs(x1 - x2)")
    x = np.linspace(0, 1, 7)
    v = np.linspace(0, 1, 7)[::-1]
    vec = evaluate(e, [x, v], 0.0)
    for i in range(7):
        assert vec[i] == pytest.approx(eval_expr(e, [x[i], v[i]], 0.0), abs=1e-15)


_leaf = st.one_of(st.sampled_from(["x1", "x2", "t", "pi"]),
                  st.floats(0.1, 10, allow_nan=False).map(lambda f: repr(round(f, 3))))


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*"), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "abs"]), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda c: f"-{c}"),
    )


@settings(max_examples=100)
@given(st.recursive(_leaf, _combine, max_leaves=8))
def test_print_parse_fixed_point(text):
    e = parse_expr(text)
    assert parse_expr(to_text(e)) == e


def test_constraint_pass_and_fail():
    ok = TransportProblem(["x2-0.5", "-(x1-0.5)"], "1", T=1.0)
    assert check_constraint(ok).passed and ok.constraint_ok
    bad = TransportProblem(["x1", "0"], "1", T=1.0)
    rep = check_constraint(bad)
    assert not rep.passed and not bad.constraint_ok
    assert rep.worst[0][0] == pytest.approx(1.0, rel=1e-6)
    assert "axis 1" in str(rep)


def test_problem_validation():
    with pytest.raises(ValueError):
        TransportProblem(["x1"], "1", p=0)
    with pytest.raises(ValueError):
        TransportProblem(["x1"], "1", T=0)
    with pytest.raises(ValueError):
        TransportProblem(["x2"], "1")


def test_explicit_samples():
    from qtransport.grid import build_grid
    prob = TransportProblem(["1"], [1, 2, 3, 4])
    np.testing.assert_array_equal(prob.initial_samples(build_grid([2])), [1, 2, 3, 4])
    with pytest.raises(ValueError):
        prob.initial_samples(build_grid([3]))
