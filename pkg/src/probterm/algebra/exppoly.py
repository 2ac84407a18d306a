"""Exponential polynomials in the loop counter ``n``.

An ``ExpPoly`` is a finite sum ``sum coeff * n**k * base**n`` with constant
coefficients and bases, or one of the two infinities.  A term with base ``0``
is special: the key ``(j, 0)`` denotes the Kronecker delta ``[n = j]``.  Such
terms only correct finitely many initial values and are ignored by every
asymptotic query.
"""

from __future__ import annotations

import enum
from math import comb
from typing import Iterable, Mapping

import sympy as sp

from ..errors import ResonanceAmbiguity
from .symbolic import ONE, ZERO, Trilean, canon, is_negative, is_positive, sign_of, sym_sign, to_str

N = sp.Symbol("n", integer=True, nonnegative=True)


class Sign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    ZERO = "zero"
    UNKNOWN = "unknown"


class ExpPoly:
    __slots__ = ("_terms", "inf", "_hash")

    def __init__(self, terms: Mapping | None = None, inf: int = 0, *, _clean=False):
        self.inf = inf
        if inf:
            self._terms = {}
        elif _clean:
            self._terms = dict(terms)
        else:
            self._terms = {}
            for (k, base), c in (terms or {}).items():
                base = canon(base)
                key = (k, base)
                c = canon(self._terms.get(key, ZERO) + c)
                if c == 0:
                    self._terms.pop(key, None)
                else:
                    self._terms[key] = c
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, c) -> "ExpPoly":
        return cls({(0, ONE): c})

    @classmethod
    def term(cls, c, k: int = 0, base=1) -> "ExpPoly":
        return cls({(k, base): c})

    @classmethod
    def n(cls, k: int = 1) -> "ExpPoly":
        return cls({(k, ONE): ONE})

    @classmethod
    def zero(cls) -> "ExpPoly":
        return cls()

    # access ---------------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.inf == 0

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: (sp.default_sort_key(kv[0][1]), kv[0][0]))

    def is_zero(self) -> bool:
        return self.inf == 0 and not self._terms

    def is_constant(self) -> bool:
        return self.inf == 0 and all(k == 0 and b == 1 for k, b in self._terms)

    def constant_value(self):
        return self._terms.get((0, ONE), ZERO)

    def symbols(self) -> set[str]:
        out = set()
        for (k, b), c in self._terms.items():
            out |= {s.name for s in c.free_symbols | b.free_symbols}
        return out

    def eventual(self) -> "ExpPoly":
        """Drop the Kronecker-delta terms, which vanish for large ``n``."""
        if self.inf or all(b != 0 for _, b in self._terms):
            return self
        return ExpPoly({key: c for key, c in self._terms.items() if key[1] != 0}, _clean=True)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ExpPoly):
            other = ExpPoly.const(other)
        if self.inf or other.inf:
            if self.inf and other.inf and self.inf != other.inf:
                raise ArithmeticError("+oo - oo is undefined")
            return ExpPoly(inf=self.inf or other.inf)
        acc = dict(self._terms)
        for key, c in other._terms.items():
            v = canon(acc.get(key, ZERO) + c)
            if v == 0:
                acc.pop(key, None)
            else:
                acc[key] = v
        return ExpPoly(acc, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        if self.inf:
            return ExpPoly(inf=-self.inf)
        return ExpPoly({key: -c for key, c in self._terms.items()}, _clean=True)

    def __sub__(self, other):
        if not isinstance(other, ExpPoly):
            other = ExpPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return ExpPoly.const(other) - self

    def scale(self, c) -> "ExpPoly":
        c = canon(c)
        if self.inf:
            s = sign_of(c)
            if s is None:
                raise ArithmeticError("scaling infinity by a constant of unknown sign")
            return ExpPoly() if s == 0 else ExpPoly(inf=self.inf * s)
        if c == 0:
            return ExpPoly()
        return ExpPoly({key: canon(c * v) for key, v in self._terms.items()}, _clean=True)

    def __mul__(self, other):
        if not isinstance(other, ExpPoly):
            return self.scale(other)
        if self.inf or other.inf:
            raise ArithmeticError("use intervals.mul_endpoint for products with infinity")
        acc: dict = {}
        for t1, c1 in self._terms.items():
            for t2, c2 in other._terms.items():
                key, c = _term_product(t1, t2)
                if key is not None:
                    acc[key] = acc.get(key, ZERO) + c1 * c2 * c
        return ExpPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if self.inf:
            if k == 0:
                return ExpPoly.const(1)
            return ExpPoly(inf=self.inf if (self.inf > 0 or k % 2) else 1)
        result = ExpPoly.const(1)
        for _ in range(k):
            result = result * self
        return result

    def shift(self, s: int) -> "ExpPoly":
        """The function ``n -> f(n + s)``."""
        if self.inf or s == 0:
            return self
        acc: dict = {}
        for (k, b), c in self._terms.items():
            if b == 0:
                if k - s >= 0:
                    acc[(k - s, b)] = acc.get((k - s, b), ZERO) + c
                continue
            scale = c * b ** s
            for j in range(k + 1):
                acc[(j, b)] = acc.get((j, b), ZERO) + scale * comb(k, j) * sp.Integer(s) ** (k - j)
        return ExpPoly(acc)

    # evaluation -----------------------------------------------------------
    def at(self, n: int, bindings: Mapping | None = None):
        """Exact value at integer ``n`` (symbols substituted when ``bindings`` is given)."""
        if self.inf:
            return sp.oo if self.inf > 0 else -sp.oo
        total = ZERO
        for (k, b), c in self._terms.items():
            if b == 0:
                total += c if n == k else ZERO
                continue
            total += c * sp.Integer(n) ** k * b ** n
        total = canon(total)
        if bindings is not None:
            from .symbolic import evaluate_exact

            total = evaluate_exact(total, bindings)
        return total

    def evalf(self, n: float, bindings: Mapping) -> float:
        if self.inf:
            return float("inf") if self.inf > 0 else float("-inf")
        from .symbolic import evaluate

        total = 0.0
        for (k, b), c in self._terms.items():
            if b == 0:
                total += evaluate(c, bindings) if n == k else 0.0
                continue
            total += evaluate(c, bindings) * n ** k * evaluate(b, bindings) ** n
        return total

    def to_expr(self) -> sp.Expr:
        if self.inf:
            return sp.oo if self.inf > 0 else -sp.oo
        return sp.Add(*[
            c * (sp.KroneckerDelta(N, k) if b == 0 else N ** k * b ** N)
            for (k, b), c in self._terms.items()
        ])

    # protocol -------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.inf == other.inf and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.inf, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"ExpPoly({self})"

    def __str__(self):
        if self.inf:
            return "oo" if self.inf > 0 else "-oo"
        if not self._terms:
            return "0"
        parts = []
        for (k, b), c in self.items():
            factors = []
            if b == 0:
                factors.append(f"[n={k}]")
            else:
                if k:
                    factors.append("n" if k == 1 else f"n**{k}")
                if b != 1:
                    bs = to_str(b)
                    factors.append(f"{bs}**n" if (b.is_Symbol or b.is_Integer) and b > 0 else f"({bs})**n")
            cs = to_str(c)
            if not factors:
                parts.append(cs)
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                if c.is_Add or (c.is_Rational and not c.is_Integer):
                    cs = f"({cs})"
                parts.append(cs + "*" + "*".join(factors))
        out = parts[0]
        for t in parts[1:]:
            out += " - " + t[1:] if t.startswith("-") else " + " + t
        return out


POS_INF = ExpPoly(inf=1)
NEG_INF = ExpPoly(inf=-1)


# --- growth order ------------------------------------------------------------

def _magnitude(base):
    """|base| when its sign is certified, else None."""
    if base == 0:
        return ZERO
    if is_positive(base):
        return base
    if is_negative(base):
        return canon(-base)
    return None


def compare_growth(t1, t2):
    """Compare terms ``(k, base)`` by growth of ``n**k * |base|**n``.

    Returns +1, 0 or -1, or None when the base magnitudes cannot be ordered.
    """
    (k1, b1), (k2, b2) = t1, t2
    m1, m2 = _magnitude(b1), _magnitude(b2)
    if m1 is None or m2 is None:
        if canon(b1 - b2) == 0:
            return (k1 > k2) - (k1 < k2)
        return None
    d = canon(m1 - m2)
    if d == 0:
        if m1 == 0:
            return 0
        return (k1 > k2) - (k1 < k2)
    s = sign_of(d)
    return s


def leading_term(f: ExpPoly):
    """The unique fastest-growing term of ``f`` (ignoring ``0**n``), or None."""
    f = f.eventual()
    keys = list(f._terms)
    if not keys:
        return None
    for cand in keys:
        if all(other == cand or compare_growth(cand, other) == 1 for other in keys):
            return cand
    return None


def eventual_sign(f: ExpPoly) -> Sign:
    """Sign of ``f(n)`` for all sufficiently large ``n``."""
    if f.inf:
        return Sign.POSITIVE if f.inf > 0 else Sign.NEGATIVE
    f = f.eventual()
    if f.is_zero():
        return Sign.ZERO
    lead = leading_term(f)
    if lead is None:
        return Sign.UNKNOWN
    k, base = lead
    if not is_positive(base):
        return Sign.UNKNOWN
    s = sign_of(f._terms[lead])
    if s is None:
        return Sign.UNKNOWN
    return Sign.POSITIVE if s > 0 else Sign.NEGATIVE


def dominates(f: ExpPoly, g: ExpPoly) -> Trilean:
    """Does ``f`` grow at least as fast as ``g`` (``|g/f|`` eventually bounded)?"""
    if not (f.is_finite and g.is_finite):
        raise ValueError("dominates is defined on finite exponential polynomials")
    f, g = f.eventual(), g.eventual()
    if g.is_zero():
        return Trilean.TRUE
    if f.is_zero():
        return Trilean.FALSE
    lead = leading_term(f)
    if lead is None:
        return Trilean.UNKNOWN
    result = Trilean.TRUE
    for term in g._terms:
        c = compare_growth(lead, term)
        if c is None:
            result = Trilean.UNKNOWN
        elif c < 0:
            return Trilean.FALSE
    return result


def is_bounded(f: ExpPoly) -> Trilean:
    if not f.is_finite:
        return Trilean.FALSE
    return dominates(ExpPoly.const(1), f)


def _pick(fs: Iterable[ExpPoly], want: int):
    fs = list(fs)
    inf = POS_INF if want > 0 else NEG_INF
    finite = []
    for f in fs:
        if f.inf == want:
            return inf
        if f.inf == 0:
            finite.append(f)
    if not finite:
        return -inf if fs else inf
    best = finite[0]
    for f in finite[1:]:
        s = eventual_sign(f - best)
        if s is Sign.UNKNOWN:
            return inf
        if (s is Sign.POSITIVE and want > 0) or (s is Sign.NEGATIVE and want < 0):
            best = f
    return best


def eventual_max(fs: Iterable[ExpPoly]) -> ExpPoly:
    """Eventual pointwise maximum; +oo when two candidates are incomparable."""
    return _pick(fs, 1)


def eventual_min(fs: Iterable[ExpPoly]) -> ExpPoly:
    return _pick(fs, -1)


# --- first-order linear recurrences ------------------------------------------

def _term_product(t1, t2):
    """Product of two basis terms as ``(key, factor)``, or ``(None, 0)``."""
    (k1, b1), (k2, b2) = t1, t2
    if b1 == 0 and b2 == 0:
        return ((k1, b1), ONE) if k1 == k2 else (None, ZERO)
    if b1 == 0:
        return (k1, b1), canon(sp.Integer(k1) ** k2 * b2 ** k1)
    if b2 == 0:
        return (k2, b2), canon(sp.Integer(k2) ** k1 * b1 ** k2)
    return (k1 + k2, canon(b1 * b2)), ONE


def _particular(a, c, k: int, base):
    """Particular solution of ``f(n+1) = a f(n) + c n**k base**n``.

    For ``base == 0`` the forcing is ``c [n = k]`` and the solution is
    ``c a**(n-k-1)`` from ``n = k+1`` on, zero before.
    """
    if base == 0:
        if sign_of(a) is None:
            raise ResonanceAmbiguity(f"cannot decide whether {to_str(a)} is zero")
        scale = canon(c / a ** (k + 1))
        terms = {(0, a): scale}
        for i in range(k + 1):
            terms[(i, ZERO)] = canon(-scale * a ** i)
        return ExpPoly(terms)
    d = canon(base - a)
    if d == 0:
        # resonance: degree k+1 polynomial times a**n with zero constant term
        # p(n+1) - p(n) = (c/a) n**k
        rhs = canon(c / a)
        p = [ZERO] * (k + 2)
        for j in range(k, -1, -1):
            acc = rhs if j == k else ZERO
            for i in range(j + 2, k + 2):
                acc -= p[i] * comb(i, j)
            p[j + 1] = canon(acc / (j + 1))
        return ExpPoly({(i, base): p[i] for i in range(1, k + 2)})
    if sign_of(d) is None:
        raise ResonanceAmbiguity(
            f"cannot decide whether base {to_str(base)} equals the coefficient {to_str(a)}"
        )
    # base * p(n+1) - a * p(n) = c n**k, solved from the top coefficient down
    p = [ZERO] * (k + 1)
    for j in range(k, -1, -1):
        acc = c if j == k else ZERO
        for i in range(j + 1, k + 1):
            acc -= base * p[i] * comb(i, j)
        p[j] = canon(acc / d)
    return ExpPoly({(i, base): p[i] for i in range(k + 1)})


def solve_recurrence(a, g: ExpPoly, init) -> ExpPoly:
    """Closed form of ``f(0) = init``, ``f(n+1) = a*f(n) + g(n)``."""
    a = canon(a)
    init = canon(init)
    if not g.is_finite:
        return g
    if a == 0:
        shifted = g.shift(-1)
        return shifted + ExpPoly.term(init - shifted.at(0), 0, 0)
    part = ExpPoly()
    for (k, base), c in g._terms.items():
        part = part + _particular(a, c, k, base)
    return part + ExpPoly.term(init - part.at(0), 0, a)
