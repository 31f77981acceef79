import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symphonic import expr as ex


def test_basic_tree():
    tree = ex.parse("x^2 + y^2", ["x", "y"])
    assert tree == ex.BinOp("+", ex.PowC(ex.Var("x"), 2.0),
                            ex.PowC(ex.Var("y"), 2.0))


def test_pow_call_with_fraction():
    tree = ex.parse("pow(x^2 + y^2, 1/3)", ["x", "y"])
    assert isinstance(tree, ex.PowC)
    assert tree.exponent == pytest.approx(1 / 3)


def test_syntax_error_position():
    with pytest.raises(ex.SyntaxErrorAt) as err:
        ex.parse("sin(t", ["t"])
    assert "column 6" in str(err.value)


def test_undeclared_variable():
    with pytest.raises(ex.UndeclaredVariable) as err:
        ex.parse("x + q", ["x"])
    assert err.value.name == "q"


def test_unary_minus_binds_below_power():
    tree = ex.parse("-x^2", ["x"])
    assert tree == ex.Neg(ex.PowC(ex.Var("x"), 2.0))
    assert ex.eval_value(tree, ["x"], [3.0]) == pytest.approx(-9.0)
    explicit = ex.parse("(-x)^2", ["x"])
    assert ex.eval_value(explicit, ["x"], [3.0]) == pytest.approx(9.0)


def test_left_associativity():
    tree = ex.parse("10 - 4 - 3", [])
    assert ex.eval_value(tree, [], []) == pytest.approx(3.0)
    tree = ex.parse("24 / 4 / 3", [])
    assert ex.eval_value(tree, [], []) == pytest.approx(2.0)


def test_exponent_fraction_binds_to_power():
    tree = ex.parse("x^2/3", ["x"])
    assert isinstance(tree, ex.PowC)
    assert tree.exponent == pytest.approx(2 / 3)
    # a decimal denominator stays a division
    tree = ex.parse("x^2 / 3.0", ["x"])
    assert isinstance(tree, ex.BinOp)
    assert ex.eval_value(tree, ["x"], [3.0]) == pytest.approx(3.0)


def test_negative_exponent():
    tree = ex.parse("x^-2", ["x"])
    assert ex.eval_value(tree, ["x"], [2.0]) == pytest.approx(0.25)


def test_chained_power_rejected():
    with pytest.raises(ex.SyntaxErrorAt):
        ex.parse("x^2^3", ["x"])


def test_nonconstant_pow_exponent_rejected():
    with pytest.raises(ex.SyntaxErrorAt):
        ex.parse("pow(x, y)", ["x", "y"])


def test_scientific_notation():
    tree = ex.parse("1.5e-3 * x", ["x"])
    assert ex.eval_value(tree, ["x"], [2.0]) == pytest.approx(3e-3)


def test_eval_jet_polynomial():
    tree = ex.parse("t^2", ["t"])
    jet = ex.eval_jet(tree, ["t"], [3.0], 2)
    assert jet.coefficient((0,)) == pytest.approx(9.0)
    assert jet.coefficient((1,)) == pytest.approx(6.0)
    assert jet.coefficient((2,)) == pytest.approx(1.0)


def test_eval_jet_fractional_power():
    tree = ex.parse("pow(t, 4/3)", ["t"])
    jet = ex.eval_jet(tree, ["t"], [1.0], 4)
    expected = [4 / 3, 4 / 9, -8 / 27, 40 / 81]
    for k, e in enumerate(expected, start=1):
        assert jet.derivative((k,)) == pytest.approx(e, rel=1e-12)


def test_eval_jet_product():
    tree = ex.parse("sin(x)*y", ["x", "y"])
    jet = ex.eval_jet(tree, ["x", "y"], [0.0, 2.0], 2)
    assert jet.derivative((1, 0)) == pytest.approx(2.0)
    assert jet.derivative((0, 1)) == pytest.approx(0.0)
    assert jet.derivative((1, 1)) == pytest.approx(1.0)
    assert jet.derivative((2, 0)) == pytest.approx(0.0)


def test_domain_error_names_subexpression():
    tree = ex.parse("log(x - 5)", ["x"])
    with pytest.raises(ex.EvalDomainError) as err:
        ex.eval_value(tree, ["x"], [1.0])
    assert "log" in str(err.value)


def test_constant_expression_evaluates_without_env():
    tree = ex.parse("2 * (3 + 4)", [])
    assert ex.eval_value(tree, [], []) == pytest.approx(14.0)


# round-trip property ------------------------------------------------------

_COORDS = ["x", "y"]


def _expr_trees(depth):
    leaf = st.one_of(
        st.floats(0.0, 9.0).map(lambda v: ex.Const(round(v, 3))),
        st.sampled_from(_COORDS).map(ex.Var),
    )
    if depth == 0:
        return leaf
    sub = _expr_trees(depth - 1)
    return st.one_of(
        leaf,
        sub.map(ex.Neg),
        st.tuples(st.sampled_from("+-*/"), sub, sub).map(
            lambda t: ex.BinOp(*t)),
        st.tuples(sub, st.sampled_from([2.0, 3.0, 0.5, -1.0])).map(
            lambda t: ex.PowC(*t)),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), sub).map(
            lambda t: ex.Call(*t)),
    )


@given(_expr_trees(3))
@settings(max_examples=200, deadline=None)
def test_print_parse_round_trip(tree):
    text = ex.to_source(tree)
    assert ex.parse(text, _COORDS) == tree
