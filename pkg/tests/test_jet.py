import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from symphonic.jet import (Jet, JetDomainError, compose, jet_cos, jet_exp,
                           jet_log, jet_pow, jet_sin, jet_sqrt, monomials)


def jet_of(fn_sym, var_values, order, syms=None):
    """Evaluate a sympy expression in jet arithmetic."""
    if syms is None:
        syms = sorted(fn_sym.free_symbols, key=lambda s: s.name)
    n = len(var_values)
    env = {}
    for k, s in enumerate(syms):
        env[s] = Jet.variable(k, var_values[k], n, order)
    fns = {sp.sin: jet_sin, sp.cos: jet_cos, sp.exp: jet_exp, sp.log: jet_log}

    def rec(e):
        if e.is_Number:
            return float(e)
        if e.is_Symbol:
            return env[e]
        if e.is_Add:
            out = rec(e.args[0])
            for a in e.args[1:]:
                out = out + rec(a)
            return out
        if e.is_Mul:
            out = rec(e.args[0])
            for a in e.args[1:]:
                out = out * rec(a)
            return out
        if e.is_Pow:
            return jet_pow(rec(e.base), float(e.exp))
        return fns[e.func](rec(e.args[0]))

    return rec(fn_sym)


def test_polynomial_exactness_single_var():
    t = sp.Symbol("t")
    poly = 3 * t**4 - 2 * t**3 + t - 7
    jet = jet_of(poly, [1.7], 4)
    for k in range(5):
        expected = float(sp.diff(poly, t, k).subs(t, 1.7))
        assert jet.derivative((k,)) == pytest.approx(expected, rel=1e-12)


@given(st.lists(st.integers(-5, 5), min_size=15, max_size=15),
       st.floats(-2.0, 2.0))
@settings(max_examples=25, deadline=None)
def test_polynomial_exactness_two_vars(coeffs, base_x):
    x, y = sp.symbols("x y")
    monos = [m for m in monomials(2, 4) if sum(m) <= 4][:15]
    poly = sum(c * x**a * y**b for c, (a, b) in zip(coeffs, monos))
    if poly == 0 or not poly.free_symbols:
        return
    pt = [base_x, 0.6]
    jet = jet_of(poly, pt, 4, syms=[x, y])
    for alpha in monomials(2, 4):
        expected = float(sp.diff(poly, x, alpha[0], y, alpha[1])
                         .subs({x: pt[0], y: pt[1]}))
        scale = max(abs(expected), 1.0)
        assert abs(jet.derivative(alpha) - expected) <= 1e-10 * scale


@pytest.mark.parametrize("order_low,order_high", [(1, 4), (2, 4), (3, 4), (2, 3)])
def test_truncation_consistency(order_low, order_high):
    x, y = sp.symbols("x y")
    f = sp.sin(x) * sp.exp(y / 3) + x**2 * y
    lo = jet_of(f, [0.4, 1.1], order_low)
    hi = jet_of(f, [0.4, 1.1], order_high)
    assert np.allclose(lo.coeffs, hi.coeffs[: lo.coeffs.size], rtol=1e-13)


def test_transcendental_derivatives():
    f = jet_sin(Jet.variable(0, 0.3, 1, 4))
    for k, expected in enumerate([math.sin(0.3), math.cos(0.3),
                                  -math.sin(0.3), -math.cos(0.3),
                                  math.sin(0.3)]):
        assert f.derivative((k,)) == pytest.approx(expected, rel=1e-12)
    g = jet_log(Jet.variable(0, 2.0, 1, 3))
    assert g.derivative((1,)) == pytest.approx(0.5)
    assert g.derivative((2,)) == pytest.approx(-0.25)
    assert g.derivative((3,)) == pytest.approx(0.25)


def test_fractional_power():
    jet = jet_pow(Jet.variable(0, 1.0, 1, 4), 4.0 / 3.0)
    expected = [1.0, 4 / 3, 4 / 9, -8 / 27, 40 / 81]
    for k, e in enumerate(expected):
        assert jet.derivative((k,)) == pytest.approx(e, rel=1e-12)


def test_sqrt_and_division():
    u = Jet.variable(0, 4.0, 1, 3)
    s = jet_sqrt(u)
    assert s.value == pytest.approx(2.0)
    assert s.derivative((1,)) == pytest.approx(0.25)
    q = 1.0 / u
    assert q.derivative((1,)) == pytest.approx(-1 / 16)
    r = u / u
    assert r.derivative((1,)) == pytest.approx(0.0, abs=1e-15)


def test_domain_errors():
    zero = Jet.constant(0.0, 1, 2)
    with pytest.raises(JetDomainError):
        _ = Jet.constant(1.0, 1, 2) / zero
    with pytest.raises(JetDomainError):
        jet_log(Jet.constant(-1.0, 1, 2))
    with pytest.raises(JetDomainError):
        jet_pow(Jet.constant(-2.0, 1, 2), 0.5)
    with pytest.raises(JetDomainError):
        jet_sqrt(Jet.constant(-1.0, 1, 2))


def test_integer_power_of_negative_base():
    u = Jet.variable(0, -2.0, 1, 2)
    p = jet_pow(u, 3)
    assert p.value == pytest.approx(-8.0)
    assert p.derivative((1,)) == pytest.approx(12.0)


def test_partial_extraction_lowers_order():
    x, y = sp.symbols("x y")
    f = jet_of(x**3 * y + sp.cos(y), [0.7, 0.2], 4)
    fx = f.partial(0)
    assert fx.order == 3
    assert fx.value == pytest.approx(3 * 0.7**2 * 0.2)
    assert fx.derivative((1, 1)) == pytest.approx(6 * 0.7)


def test_compose_against_sympy():
    t = sp.Symbol("t")
    x, y = sp.symbols("x y")
    outer_sym = sp.sin(x) + x * y**2
    inner1 = t**2 + 1
    inner2 = sp.cos(t)
    composite = outer_sym.subs({x: inner1, y: inner2})
    t0 = 0.8
    outer = jet_of(outer_sym, [float(inner1.subs(t, t0)),
                               float(inner2.subs(t, t0))], 3)
    inner_jets = [jet_of(inner1, [t0], 3), jet_of(inner2, [t0], 3)]
    got = compose(outer, inner_jets)
    for k in range(4):
        expected = float(sp.diff(composite, t, k).subs(t, t0))
        assert got.derivative((k,)) == pytest.approx(expected, rel=1e-11)


def test_monomial_enumeration_is_prefix_stable():
    low = monomials(3, 2)
    high = monomials(3, 4)
    assert high[: len(low)] == low
    assert len(monomials(2, 4)) == 15
    assert len(monomials(4, 4)) == 70
