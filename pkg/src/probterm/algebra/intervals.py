"""Interval extension of polynomials with exponential-polynomial endpoints.

Endpoints are functions of ``n``; comparisons between them are eventual
(see ``exppoly.eventual_sign``).  Whenever an ordering or a sign cannot be
established the affected side widens to infinity, never the other way round.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .exppoly import NEG_INF, POS_INF, ExpPoly, Sign, eventual_max, eventual_min, eventual_sign
from .polynomial import Polynomial
from .symbolic import canon


@dataclass(frozen=True)
class Interval:
    lo: ExpPoly
    hi: ExpPoly

    @classmethod
    def point(cls, f) -> "Interval":
        if not isinstance(f, ExpPoly):
            f = ExpPoly.const(f)
        return cls(f, f)

    @classmethod
    def const(cls, lo, hi) -> "Interval":
        return cls(_as_endpoint(lo, -1), _as_endpoint(hi, 1))

    @classmethod
    def everything(cls) -> "Interval":
        return cls(NEG_INF, POS_INF)

    @property
    def is_bounded(self) -> bool:
        return self.lo.is_finite and self.hi.is_finite

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        corners = [
            mul_endpoint(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)
        ]
        if any(c is None for c in corners):
            return Interval.everything()
        return Interval(eventual_min(corners), eventual_max(corners))

    def __pow__(self, k: int) -> "Interval":
        if k == 0:
            return Interval.point(1)
        if k == 1:
            return self
        lo_k, hi_k = self.lo ** k, self.hi ** k
        if k % 2:
            return Interval(lo_k, hi_k)
        s_lo, s_hi = eventual_sign(self.lo), eventual_sign(self.hi)
        if s_lo in (Sign.POSITIVE, Sign.ZERO):
            return Interval(lo_k, hi_k)
        if s_hi in (Sign.NEGATIVE, Sign.ZERO):
            return Interval(hi_k, lo_k)
        return Interval(ExpPoly.zero(), eventual_max([lo_k, hi_k]))

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def _as_endpoint(v, inf_side):
    if isinstance(v, ExpPoly):
        return v
    if v is None:
        return POS_INF if inf_side > 0 else NEG_INF
    return ExpPoly.const(v)


def mul_endpoint(a: ExpPoly, b: ExpPoly):
    """Product of two endpoints; None when an infinity meets an unknown sign."""
    if a.is_finite and b.is_finite:
        return a * b
    if not a.is_finite and not b.is_finite:
        return ExpPoly(inf=a.inf * b.inf)
    inf, other = (a, b) if not a.is_finite else (b, a)
    s = eventual_sign(other)
    if s is Sign.ZERO:
        return ExpPoly.zero()
    if s is Sign.POSITIVE:
        return inf
    if s is Sign.NEGATIVE:
        return -inf
    return None


def poly_eval_bounds(p: Polynomial, env: Mapping[str, Interval]) -> Interval:
    """Sound interval of ``p`` when each variable ranges over ``env[var]``."""
    total = Interval.point(0)
    for m, c in p.items():
        part = Interval.point(ExpPoly.const(canon(c)))
        for v, e in m:
            part = part * (env[v] ** e)
        total = total + part
    return total
