"""Exact constants over the rationals and positive symbolic parameters.

Constants are plain sympy expressions kept in a canonical ratio-of-polynomials
form (``canon``).  Every symbol is created with ``positive=True``; the sign
prover below never relies on anything beyond that assumption.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from functools import lru_cache

import sympy as sp

ZERO = sp.Integer(0)
ONE = sp.Integer(1)


class Trilean(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    def __bool__(self):
        raise TypeError("Trilean has no implicit truth value; compare with Trilean.TRUE")

    def __invert__(self):
        if self is Trilean.TRUE:
            return Trilean.FALSE
        if self is Trilean.FALSE:
            return Trilean.TRUE
        return Trilean.UNKNOWN

    def __and__(self, other):
        if Trilean.FALSE in (self, other):
            return Trilean.FALSE
        if self is Trilean.TRUE and other is Trilean.TRUE:
            return Trilean.TRUE
        return Trilean.UNKNOWN

    def __or__(self, other):
        if Trilean.TRUE in (self, other):
            return Trilean.TRUE
        if self is Trilean.FALSE and other is Trilean.FALSE:
            return Trilean.FALSE
        return Trilean.UNKNOWN

    @classmethod
    def of(cls, value):
        if value is None:
            return cls.UNKNOWN
        return cls.TRUE if value else cls.FALSE


@lru_cache(maxsize=None)
def symbol(name: str) -> sp.Symbol:
    return sp.Symbol(name, positive=True)


def const(value) -> sp.Expr:
    """Exact constant from an int, Fraction, decimal string or sympy expression."""
    if isinstance(value, sp.Basic):
        return canon(value)
    if isinstance(value, (int, Fraction)):
        return sp.Rational(value)
    if isinstance(value, str):
        return sp.Rational(Fraction(value))
    if isinstance(value, float):
        return sp.Rational(Fraction(value))
    raise TypeError(f"cannot convert {value!r} to an exact constant")


@lru_cache(maxsize=65536)
def _canon_cached(e: sp.Expr) -> sp.Expr:
    return sp.cancel(e)


def canon(e) -> sp.Expr:
    if not isinstance(e, sp.Basic):
        return const(e)
    if e.is_Rational:
        return e
    return _canon_cached(e)


def is_zero(e) -> bool:
    return canon(e) == 0


def equal(a, b) -> bool:
    return canon(a - b) == 0


def is_numeric(e) -> bool:
    return not canon(e).free_symbols


def free_names(e) -> set[str]:
    return {s.name for s in canon(e).free_symbols}


# --- sign certificates -----------------------------------------------------
# A certificate is one of "pos", "neg", "nonneg", "nonpos" or None.

_FLIP = {"pos": "neg", "neg": "pos", "nonneg": "nonpos", "nonpos": "nonneg", None: None}


def _times(a, b):
    if a is None or b is None:
        return None
    negative = (a in ("neg", "nonpos")) != (b in ("neg", "nonpos"))
    strict = a in ("pos", "neg") and b in ("pos", "neg")
    if strict:
        return "neg" if negative else "pos"
    return "nonpos" if negative else "nonneg"


def _number_cert(c):
    if c.is_positive:
        return "pos"
    if c.is_negative:
        return "neg"
    if c.is_zero:
        return None
    return None


def _poly_cert(p: sp.Expr):
    """All-same-sign coefficients over positive symbols give a strict sign."""
    p = sp.expand(p)
    if p == 0:
        return None
    syms = sorted(p.free_symbols, key=lambda s: s.name)
    if not syms:
        return _number_cert(p)
    coeffs = sp.Poly(p, *syms).coeffs()
    signs = {_number_cert(c) for c in coeffs}
    if signs == {"pos"}:
        return "pos"
    if signs == {"neg"}:
        return "neg"
    return None


def _factored_cert(p: sp.Expr):
    cert = _poly_cert(p)
    if cert is not None:
        return cert
    if not p.free_symbols:
        return None
    lead, factors = sp.factor_list(p)
    result = _number_cert(lead)
    for factor, mult in factors:
        f_cert = _poly_cert(factor)
        if f_cert is None:
            f_cert = "nonneg" if mult % 2 == 0 else None
        elif mult % 2 == 0:
            f_cert = "pos"
        result = _times(result, f_cert)
        if result is None:
            return None
    return result


@lru_cache(maxsize=65536)
def _certificate(e: sp.Expr):
    if e == 0:
        return None
    if not e.free_symbols:
        return _number_cert(e)
    num, den = sp.fraction(e)
    num_cert = _factored_cert(num)
    den_cert = _factored_cert(den)
    if den_cert not in ("pos", "neg"):
        return None
    if den_cert == "neg":
        return _FLIP[num_cert]
    return num_cert


def sym_sign(e) -> Trilean:
    """Is ``e > 0`` for every assignment of positive reals to its symbols?

    TRUE and FALSE are backed by certificates; everything else is UNKNOWN.
    FALSE means ``e <= 0`` everywhere (including the identically-zero case).
    """
    e = canon(e)
    if e == 0:
        return Trilean.FALSE
    cert = _certificate(e)
    if cert == "pos":
        return Trilean.TRUE
    if cert in ("neg", "nonpos"):
        return Trilean.FALSE
    return Trilean.UNKNOWN


def is_positive(e) -> bool:
    return sym_sign(e) is Trilean.TRUE


def is_negative(e) -> bool:
    return sym_sign(-canon(e)) is Trilean.TRUE


def is_nonneg(e) -> bool:
    e = canon(e)
    return e == 0 or _certificate(e) in ("pos", "nonneg")


def sign_of(e):
    """+1, -1, 0 or None for a constant, using the certificate rules."""
    e = canon(e)
    if e == 0:
        return 0
    if is_positive(e):
        return 1
    if is_negative(e):
        return -1
    return None


def abs_const(e):
    """|e| when the sign of ``e`` is certified, else None."""
    s = sign_of(e)
    if s is None:
        return None
    return canon(e) if s >= 0 else canon(-e)


def max_const(values):
    """Certified maximum of constants; falls back to a sum of absolute values."""
    values = [canon(v) for v in values]
    best = values[0]
    for v in values[1:]:
        d = sign_of(v - best)
        if d is None:
            abs_all = [abs_const(x) for x in values]
            if any(a is None for a in abs_all):
                return None
            return canon(sp.Add(*abs_all))
        if d > 0:
            best = v
    return best


def evaluate(e, bindings) -> float:
    """Numeric value under ``bindings`` (symbol name -> number)."""
    e = canon(e)
    return float(evaluate_exact(e, bindings))


def evaluate_exact(e, bindings) -> sp.Expr:
    e = canon(e)
    return e.subs({s: const(bindings[s.name]) for s in e.free_symbols})


def to_str(e) -> str:
    return sp.sstr(canon(e))
