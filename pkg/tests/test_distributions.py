import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import CONCRETE_DISTRIBUTIONS, moment_z_score, reference_samples
from probterm.algebra import symbol
from probterm.distributions import ARITY, DistSpec, raw_moment, support


def test_uniform_second_moment():
    assert raw_moment(DistSpec("uniform", (1, 2)), 2) == sp.Rational(7, 3)


def test_gauss_fourth_moment():
    assert raw_moment(DistSpec("gauss", (0, 1)), 4) == 3


def test_bernoulli_idempotent_powers():
    p = symbol("p")
    assert raw_moment(DistSpec("bernoulli", (p,)), 7) == p


def test_zeroth_moment_is_one():
    for kind, params in CONCRETE_DISTRIBUTIONS:
        assert raw_moment(DistSpec(kind, params), 0) == 1


def test_hypergeometric_higher_orders_unavailable():
    d = DistSpec("hypergeometric", (10, 4, 3))
    assert raw_moment(d, 2) is not None
    assert raw_moment(d, 3) is None


def test_order_above_cap_unavailable():
    assert raw_moment(DistSpec("gauss", (0, 1)), 9) is None
    assert raw_moment(DistSpec("gauss", (0, 1)), 10, max_order=10) == 945


def test_symbolic_moments():
    lam, mu = symbol("lam"), symbol("mu")
    assert raw_moment(DistSpec("exponential", (lam,)), 3) == 6 / lam ** 3
    assert sp.expand(raw_moment(DistSpec("gauss", (mu, 1)), 2) - (mu ** 2 + 1)) == 0


def test_supports():
    m = symbol("m")
    s = support(DistSpec("uniform", (1, 2)))
    assert (s.lo, s.hi) == (1, 2)
    s = support(DistSpec("gauss", (0, 1)))
    assert (s.lo, s.hi) == (None, None)
    s = support(DistSpec("binomial", (m, sp.Rational(1, 2))))
    assert (s.lo, s.hi) == (0, m)
    s = support(DistSpec("hypergeometric", (10, 4, 8)))
    assert (s.lo, s.hi) == (2, 4)
    assert not support(DistSpec("exponential", (1,))).bounded


def test_arity_table_covers_eleven_kinds():
    assert len(ARITY) == 11
    with pytest.raises(ValueError):
        DistSpec("uniform", (1,))


@pytest.mark.parametrize("kind,params", CONCRETE_DISTRIBUTIONS, ids=[k for k, _ in CONCRETE_DISTRIBUTIONS])
def test_cauchy_schwarz(kind, params):
    d = DistSpec(kind, params)
    for k in (1, 2):
        lo, hi = raw_moment(d, k), raw_moment(d, 2 * k)
        if lo is None or hi is None:
            continue
        assert float(hi) >= float(lo) ** 2 - 1e-12


@pytest.mark.parametrize("kind,params", CONCRETE_DISTRIBUTIONS, ids=[k for k, _ in CONCRETE_DISTRIBUTIONS])
def test_monte_carlo_moments(kind, params):
    gen = np.random.default_rng(12345)
    samples = reference_samples(kind, params, gen, 200_000)
    d = DistSpec(kind, params)
    for k in range(1, 5):
        exact = raw_moment(d, k)
        if exact is None:
            continue
        assert moment_z_score(samples, k, float(exact)) < 5, (kind, k)


@pytest.mark.parametrize("kind,params", CONCRETE_DISTRIBUTIONS, ids=[k for k, _ in CONCRETE_DISTRIBUTIONS])
def test_samples_fall_in_support(kind, params):
    gen = np.random.default_rng(7)
    samples = reference_samples(kind, params, gen, 20_000)
    s = support(DistSpec(kind, params))
    if s.lo is not None:
        assert samples.min() >= float(s.lo)
    if s.hi is not None:
        assert samples.max() <= float(s.hi)


@settings(max_examples=40, deadline=None)
@given(st.fractions(0, 1), st.integers(0, 6), st.integers(1, 6))
def test_binomial_moments_match_pmf(p, m, k):
    from fractions import Fraction
    from math import comb

    exact = sum(Fraction(comb(m, j)) * p ** j * (1 - p) ** (m - j) * j ** k for j in range(m + 1))
    value = raw_moment(DistSpec("binomial", (m, sp.Rational(p.numerator, p.denominator))), k)
    assert value == sp.Rational(exact.numerator, exact.denominator)
