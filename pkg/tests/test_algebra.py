from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from probterm.algebra import (
    NEG_INF,
    POS_INF,
    ExpPoly,
    Interval,
    Polynomial,
    Sign,
    Trilean,
    dominates,
    eventual_sign,
    poly_eval_bounds,
    solve_recurrence,
    sym_sign,
    symbol,
)
from probterm.algebra.exppoly import eventual_max, eventual_min, is_bounded
from probterm.errors import ResonanceAmbiguity

c, e, x0 = symbol("c"), symbol("e"), symbol("x0")
HALF = sp.Rational(1, 2)


def ep(*terms):
    """ExpPoly from ``(coeff, k, base)`` triples."""
    return ExpPoly({(k, sp.sympify(b)): sp.sympify(co) for co, k, b in terms})


# --- sym_sign ---------------------------------------------------------------

def test_sym_sign_product_of_positives():
    assert sym_sign(2 * e * c) is Trilean.TRUE


def test_sym_sign_unverifiable_difference():
    assert sym_sign(HALF - e) is Trilean.UNKNOWN


def test_sym_sign_negative_rational():
    assert sym_sign(sp.Rational(-3, 4)) is Trilean.FALSE


def test_sym_sign_zero_is_not_positive():
    assert sym_sign(sp.Integer(0)) is Trilean.FALSE


def test_sym_sign_sums_and_powers():
    assert sym_sign(c ** 2 + c + 1) is Trilean.TRUE
    assert sym_sign(-(c + e)) is Trilean.FALSE
    assert sym_sign(c - 1) is Trilean.UNKNOWN


# --- dominates / eventual_sign ---------------------------------------------

def test_exponential_dominates_polynomial():
    assert dominates(ep((1, 0, 2)), ep((1, 5, 1))) is Trilean.TRUE


def test_constant_dominates_decaying_term():
    assert dominates(ExpPoly.const(1), ep((1, 2, HALF))) is Trilean.TRUE


def test_symbolic_base_against_one_is_unknown():
    assert dominates(ExpPoly.const(1), ep((1, 0, HALF + e))) is Trilean.UNKNOWN


def test_polynomial_does_not_dominate_exponential():
    assert dominates(ep((1, 5, 1)), ep((1, 0, 2))) is Trilean.FALSE


def test_eventual_sign_examples():
    assert eventual_sign(ep((c, 0, 1), (-1, 1, 1))) is Sign.NEGATIVE
    assert eventual_sign(ExpPoly.const(2 * e * c)) is Sign.POSITIVE
    assert eventual_sign(ExpPoly.zero()) is Sign.ZERO
    assert eventual_sign(POS_INF) is Sign.POSITIVE
    assert eventual_sign(NEG_INF) is Sign.NEGATIVE


def test_eventual_sign_mixed_symbolic_bases():
    # (1/2+e) strictly outgrows (1/2) and its coefficient e is positive
    f = ep((-x0, 0, HALF), (e, 0, HALF + e))
    assert eventual_sign(f) is Sign.POSITIVE


def test_eventual_sign_unknown_coefficient():
    assert eventual_sign(ep((c - 1, 1, 1), (5, 0, 1))) is Sign.UNKNOWN


def test_is_bounded():
    assert is_bounded(ep((3, 0, 1), (1, 4, HALF))) is Trilean.TRUE
    assert is_bounded(ep((1, 1, 1))) is Trilean.FALSE
    assert is_bounded(POS_INF) is Trilean.FALSE


def test_eventual_max_and_min_pick_by_growth():
    a, b = ep((1, 1, 1)), ep((1, 2, 1))
    assert eventual_max([a, b]) == b
    assert eventual_min([a, b]) == a


# --- poly_eval_bounds --------------------------------------------------------

def test_bounds_identity():
    iv = Interval(ep((x0, 0, 1), (-c, 1, 1)), ep((x0, 0, 1), (c, 1, 1)))
    out = poly_eval_bounds(Polynomial.var("x"), {"x": iv})
    assert out.lo == iv.lo and out.hi == iv.hi


def test_bounds_negated_square():
    iv = Interval(ep((1, 1, 1)), ep((2, 1, 1)))
    out = poly_eval_bounds(-Polynomial.var("x", 2), {"x": iv})
    assert out.lo == ep((-4, 2, 1))
    assert out.hi == ep((-1, 2, 1))


def test_bounds_sign_propagation_with_infinity():
    env = {"x": Interval(NEG_INF, ExpPoly.zero()), "y": Interval.const(1, 2)}
    out = poly_eval_bounds(Polynomial.var("x") * Polynomial.var("y"), env)
    assert out.lo == NEG_INF
    assert out.hi == ExpPoly.zero()


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(-3, 3), min_size=4, max_size=4),
    st.integers(-4, 4), st.integers(0, 4), st.integers(-4, 4), st.integers(0, 4),
    st.fractions(0, 1), st.fractions(0, 1),
)
def test_bounds_contain_sampled_values(coeffs, xl, xw, yl, yw, tx, ty):
    x, y = Polynomial.var("x"), Polynomial.var("y")
    p = x * y * coeffs[0] + x * x * coeffs[1] + y * coeffs[2] + coeffs[3]
    env = {"x": Interval.const(xl, xl + xw), "y": Interval.const(yl, yl + yw)}
    out = poly_eval_bounds(p, env)
    xv, yv = xl + tx * xw, yl + ty * yw
    value = p.evaluate({"x": sp.Rational(xv.numerator, xv.denominator),
                        "y": sp.Rational(yv.numerator, yv.denominator)})
    assert out.lo.at(0) <= value <= out.hi.at(0)


# --- solve_recurrence ---------------------------------------------------------

def _iterate(a, g, init, steps):
    values, f = [], sp.sympify(init)
    for n in range(steps):
        values.append(f)
        f = a * f + g.at(n)
    return values


def test_recurrence_constant_drift():
    f = solve_recurrence(1, ExpPoly.const(c), x0)
    assert f == ep((x0, 0, 1), (c, 1, 1))


def test_recurrence_geometric():
    f = solve_recurrence(2, ExpPoly.const(1), 0)
    assert [f.at(n) for n in range(5)] == [0, 1, 3, 7, 15]


def test_recurrence_zero_coefficient_produces_delta():
    f = solve_recurrence(0, ExpPoly.const(3), 7)
    assert [f.at(n) for n in range(4)] == [7, 3, 3, 3]
    assert f.eventual() == ExpPoly.const(3)


def test_recurrence_unknown_resonance_raises():
    with pytest.raises(ResonanceAmbiguity):
        solve_recurrence(HALF + e, ep((1, 0, 1)), 0)


@settings(max_examples=80, deadline=None)
@given(
    st.sampled_from([0, 1, 2, -1, Fraction(1, 2), Fraction(-1, 3)]),
    st.lists(
        st.tuples(st.integers(-3, 3), st.integers(0, 2), st.sampled_from([0, 1, 2, Fraction(1, 2), -1])),
        max_size=4,
    ),
    st.integers(-5, 5),
)
def test_recurrence_matches_iteration(a, terms, init):
    a = sp.nsimplify(a)
    g = ExpPoly({(k, sp.nsimplify(b)): sp.Integer(co) for co, k, b in terms})
    f = solve_recurrence(a, g, init)
    assert [f.at(n) for n in range(10)] == _iterate(a, g, init, 10)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 2), st.sampled_from([1, 2, 3, Fraction(1, 2)])),
             min_size=1, max_size=4),
)
def test_eventual_sign_is_sound_on_concrete_functions(terms):
    f = ExpPoly({(k, sp.nsimplify(b)): sp.Integer(co) for co, k, b in terms})
    s = eventual_sign(f)
    tail = [f.at(n) for n in range(200, 206)]
    if s is Sign.POSITIVE:
        assert all(v > 0 for v in tail)
    elif s is Sign.NEGATIVE:
        assert all(v < 0 for v in tail)
    elif s is Sign.ZERO:
        assert all(v == 0 for v in tail)


def test_shift_and_product_agree_with_pointwise_values():
    f = ep((1, 0, 0), (2, 1, 1), (3, 0, HALF))
    g = ep((1, 2, 1), (-1, 1, 0))
    for n in range(6):
        assert (f * g).at(n) == f.at(n) * g.at(n)
        assert f.shift(3).at(n) == f.at(n + 3)


def test_exppoly_string_form():
    assert str(ep((x0, 0, 1), (-c, 1, 1))) == "x0 - c*n"
