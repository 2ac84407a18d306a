"""Sparse multivariate polynomials over program variables.

Coefficients are canonical sympy constants (see ``symbolic``).  A monomial is
a tuple of ``(variable, exponent)`` pairs sorted by variable name; the empty
tuple is the constant monomial.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping

import sympy as sp

from .symbolic import ONE, ZERO, canon, to_str

Monomial = tuple  # tuple[tuple[str, int], ...]

UNIT: Monomial = ()


def monomial(**exps: int) -> Monomial:
    return tuple(sorted((v, e) for v, e in exps.items() if e))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def mono_degree(m: Monomial, var: str | None = None) -> int:
    if var is None:
        return sum(e for _, e in m)
    for v, e in m:
        if v == var:
            return e
    return 0


def mono_without(m: Monomial, var: str) -> Monomial:
    return tuple((v, e) for v, e in m if v != var)


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    return "*".join(v if e == 1 else f"{v}**{e}" for v, e in m)


def _sort_key(m: Monomial):
    return (-mono_degree(m), m)


class Polynomial:
    """Immutable polynomial ``sum coeff * monomial``; zero coefficients are dropped."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None, *, _clean=False):
        if _clean:
            self._terms = dict(terms)
        else:
            self._terms = {}
            for m, c in (terms or {}).items():
                c = canon(c)
                if c != 0:
                    self._terms[m] = c
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, c) -> "Polynomial":
        return cls({UNIT: c})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "Polynomial":
        return cls({((name, power),): ONE}) if power else cls.const(1)

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    # access ---------------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]))

    def monomials(self):
        return sorted(self._terms, key=_sort_key)

    def coeff(self, m: Monomial):
        return self._terms.get(m, ZERO)

    def variables(self) -> set[str]:
        return {v for m in self._terms for v, _ in m}

    def degree(self, var: str | None = None) -> int:
        if not self._terms:
            return 0
        return max(mono_degree(m, var) for m in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == UNIT for m in self._terms)

    def constant_value(self):
        return self._terms.get(UNIT, ZERO)

    def coefficient_in(self, var: str, k: int) -> "Polynomial":
        """Coefficient polynomial of ``var**k``."""
        out = {}
        for m, c in self._terms.items():
            if mono_degree(m, var) == k:
                out[mono_without(m, var)] = c
        return Polynomial(out, _clean=True)

    def symbols(self) -> set[str]:
        return {s.name for c in self._terms.values() for s in c.free_symbols}

    # arithmetic -----------------------------------------------------------
    def _combine(self, other, sign):
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = canon(out.get(m, ZERO) + sign * c)
            if v == 0:
                out.pop(m, None)
            else:
                out[m] = v
        return Polynomial(out, _clean=True)

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        return self._combine(other, -1)

    def __rsub__(self, other):
        return Polynomial.const(other) - self

    def __neg__(self):
        return Polynomial({m: -c for m, c in self._terms.items()}, _clean=True)

    def scale(self, c) -> "Polynomial":
        c = canon(c)
        if c == 0:
            return Polynomial()
        return Polynomial({m: canon(c * v) for m, v in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        acc: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                acc[m] = acc.get(m, ZERO) + c1 * c2
        return Polynomial(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers of polynomials are not polynomials")
        result = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # substitution ---------------------------------------------------------
    def substitute_powers(self, var: str, power_image: Callable[[int], "Polynomial"]) -> "Polynomial":
        """Replace every ``var**k`` by ``power_image(k)``.

        Unlike plain substitution this lets ``var**2`` map to something other
        than the square of the image of ``var`` (branch mixtures, moments).
        """
        if var not in self.variables():
            return self
        acc: dict = {}
        cache: dict[int, Polynomial] = {}
        for m, c in self._terms.items():
            k = mono_degree(m, var)
            if k == 0:
                acc[m] = acc.get(m, ZERO) + c
                continue
            if k not in cache:
                cache[k] = power_image(k)
            rest = mono_without(m, var)
            for m2, c2 in cache[k]._terms.items():
                mm = mono_mul(rest, m2)
                acc[mm] = acc.get(mm, ZERO) + c * c2
        return Polynomial(acc)

    def substitute(self, var: str, image: "Polynomial") -> "Polynomial":
        powers: dict[int, Polynomial] = {}

        def power(k):
            if k not in powers:
                powers[k] = image ** k
            return powers[k]

        return self.substitute_powers(var, power)

    def rename(self, mapping: Mapping[str, str]) -> "Polynomial":
        out = {}
        for m, c in self._terms.items():
            exps: dict = {}
            for v, e in m:
                w = mapping.get(v, v)
                exps[w] = exps.get(w, 0) + e
            out[tuple(sorted(exps.items()))] = c
        return Polynomial(out, _clean=True)

    # evaluation -----------------------------------------------------------
    def evaluate(self, env: Mapping[str, object], bindings: Mapping[str, object] | None = None):
        """Evaluate with numeric variable values (and symbol bindings if needed)."""
        from .symbolic import evaluate_exact

        total = 0
        for m, c in self._terms.items():
            if c.free_symbols:
                cv = evaluate_exact(c, bindings or {})
            else:
                cv = c
            term = cv
            for v, e in m:
                term = term * env[v] ** e
            total = total + term
        return total

    def to_expr(self) -> sp.Expr:
        from .symbolic import symbol

        return sp.Add(*[c * sp.Mul(*[symbol(v) ** e for v, e in m]) for m, c in self._terms.items()])

    # protocol -------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        if isinstance(other, (int, sp.Basic)):
            return self == Polynomial.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        out = ""
        for m, c in self.items():
            t = _term_str(c, m)
            if not out:
                out = t
            elif t.startswith("-"):
                out += " - " + t[1:]
            else:
                out += " + " + t
        return out


def _coeff_str(c) -> str:
    s = to_str(c)
    if c.is_Symbol or (c.is_Integer and c >= 0):
        return s
    return f"({s})"


def _term_str(c, m: Monomial) -> str:
    if not m:
        return to_str(c)
    ms = mono_str(m)
    if c == 1:
        return ms
    if c == -1:
        return f"-{ms}"
    if c.is_Number and c < 0:
        return f"-{_coeff_str(-c)}*{ms}"
    return f"{_coeff_str(c)}*{ms}"


def poly_sum(polys: Iterable[Polynomial]) -> Polynomial:
    acc: dict = {}
    for p in polys:
        for m, c in p._terms.items():
            acc[m] = acc.get(m, ZERO) + c
    return Polynomial(acc)
