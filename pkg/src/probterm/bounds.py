"""Asymptotic lower/upper bounding functions for program variables.

Validity contract: for almost every run there are constants ``K`` and ``n0``
such that ``K*lo(n) - K <= x_n <= K*hi(n) + K`` for all ``n >= n0``.  Initial
values drawn from distributions with unbounded support are represented by a
fresh positive symbol ``|x(0)|`` so that the per-run magnitude stays explicit
instead of being silently absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra.exppoly import (
    NEG_INF,
    POS_INF,
    ExpPoly,
    Sign,
    eventual_max,
    eventual_min,
    eventual_sign,
    solve_recurrence,
)
from .algebra.intervals import Interval, poly_eval_bounds
from .algebra.symbolic import ONE, canon, is_nonneg, sign_of, symbol
from .distributions import DistSpec, support
from .errors import ResonanceAmbiguity
from .frontend import BranchUpdate, ProgramSpec


@dataclass(frozen=True)
class BoundPair:
    lo: ExpPoly
    hi: ExpPoly

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def init_magnitude_symbol(var: str) -> str:
    return f"|{var}(0)|"


def support_interval(d: DistSpec) -> Interval:
    s = support(d)
    return Interval.const(s.lo, s.hi)


class BoundStore:
    """Computes and memoizes ``BoundPair``s in body order."""

    def __init__(self, prog: ProgramSpec):
        self.prog = prog
        self._bounds: dict[str, BoundPair] = {}
        self.fresh_symbols: dict[str, str] = {}

    def init_interval(self, var: str) -> Interval:
        init = self.prog.init_map
        if var not in init:
            return Interval.point(0)
        v0 = init[var]
        if not isinstance(v0, DistSpec):
            return Interval.point(ExpPoly.const(v0))
        s = support(v0)
        if s.bounded:
            return Interval.const(s.lo, s.hi)
        name = init_magnitude_symbol(var)
        self.fresh_symbols[var] = name
        mag = symbol(name)
        lo = -mag if s.lo is None else s.lo
        hi = mag if s.hi is None else s.hi
        return Interval.const(lo, hi)

    def var_bounds(self, var: str) -> BoundPair:
        if var not in self._bounds:
            self._bounds[var] = self._compute(var)
        return self._bounds[var]

    def all_bounds(self) -> dict:
        return {v: self.var_bounds(v) for v in self.prog.variables}

    # ------------------------------------------------------------------------
    def _env_for(self, var: str, poly_vars) -> dict:
        """Bounds of the values read by ``var``'s update, at iteration n+1."""
        stmts = dict(self.prog.statements())
        env = {}
        for w in poly_vars:
            if w == var:
                continue
            stmt = stmts.get(w)
            if isinstance(stmt, DistSpec):
                env[w] = support_interval(stmt)
            elif stmt is not None:
                b = self.var_bounds(w)
                env[w] = Interval(b.lo.shift(1), b.hi.shift(1))
            else:
                env[w] = self.init_interval(w)
        return env

    def _compute(self, var: str) -> BoundPair:
        stmt = dict(self.prog.statements()).get(var)
        if stmt is None:
            iv = self.init_interval(var)
            return BoundPair(iv.lo, iv.hi)
        if isinstance(stmt, DistSpec):
            iv = support_interval(stmt)
            return BoundPair(iv.lo, iv.hi)
        return self._update_bounds(var, stmt)

    def _update_bounds(self, var: str, upd: BranchUpdate) -> BoundPair:
        init = self.init_interval(var)
        coeffs, rests = [], []
        for poly, _p in upd.branches:
            a_poly = poly.coefficient_in(var, 1)
            if not a_poly.is_constant():
                return BoundPair(NEG_INF, POS_INF)
            a = a_poly.constant_value()
            if not is_nonneg(a):
                return BoundPair(NEG_INF, POS_INF)
            rest = poly.coefficient_in(var, 0)
            rests.append(poly_eval_bounds(rest, self._env_for(var, rest.variables())))
            coeffs.append(a)
        lo_parts = [r.lo for r in rests]
        hi_parts = [r.hi for r in rests]

        if all(canon(a - coeffs[0]) == 0 for a in coeffs):
            # v' = a v + r_j with a >= 0: the extreme inhomogeneities bound every mixture
            a = coeffs[0]
            hi = _solve(a, eventual_max(hi_parts), init.hi, +1)
            lo = _solve(a, eventual_min(lo_parts), init.lo, -1)
            return BoundPair(lo, hi)

        # candidate-and-select: per-branch solutions, accepted when inductive
        if all(is_nonneg(ONE - a) for a in coeffs):
            hi = eventual_max([_solve(a, h, init.hi, +1) for a, h in zip(coeffs, hi_parts)])
            lo = eventual_min([_solve(a, l, init.lo, -1) for a, l in zip(coeffs, lo_parts)])
            if _inductive(hi, coeffs, hi_parts, +1) and _inductive(lo, coeffs, lo_parts, -1):
                return BoundPair(lo, hi)

        # fallback: clamp at zero and use the largest self-coefficient
        big_a = _max_coeff(coeffs)
        if big_a is None:
            return BoundPair(NEG_INF, POS_INF)
        zero = ExpPoly.zero()
        hi = _solve(big_a, eventual_max(hi_parts + [zero]), eventual_max([init.hi, zero]), +1)
        lo = _solve(big_a, eventual_min(lo_parts + [zero]), eventual_min([init.lo, zero]), -1)
        return BoundPair(lo, hi)


def _solve(a, g: ExpPoly, init: ExpPoly, side: int) -> ExpPoly:
    """Eventual part of the solution of ``f(n+1) = a f(n) + g(n)``, ``f(0) = init``.

    ``side`` is +1 for an upper bound and -1 for a lower bound; it picks the
    infinity returned when no finite closed form is available.
    """
    give_up = POS_INF if side > 0 else NEG_INF
    if not g.is_finite:
        return g
    if not init.is_finite:
        return init if canon(a) != 0 else _solve(a, g, ExpPoly.zero(), side)
    if not init.is_constant():
        return give_up
    try:
        return solve_recurrence(a, g, init.constant_value()).eventual()
    except ResonanceAmbiguity:
        return give_up


def _max_coeff(coeffs):
    best = coeffs[0]
    for a in coeffs[1:]:
        s = sign_of(a - best)
        if s is None:
            return None
        if s > 0:
            best = a
    return best


def _inductive(bound: ExpPoly, coeffs, parts, side: int) -> bool:
    """Does ``bound`` survive one more step of every branch (eventually)?"""
    if not bound.is_finite:
        return True
    nxt = bound.shift(1)
    for a, r in zip(coeffs, parts):
        if not r.is_finite:
            return False
        gap = (nxt - bound.scale(a) - r).scale(side)
        if eventual_sign(gap) not in (Sign.POSITIVE, Sign.ZERO):
            return False
    return True


def var_bounds(v: str, prog: ProgramSpec, closed=None) -> BoundPair:
    return BoundStore(prog).var_bounds(v)


def guard_refined_bounds(prog: ProgramSpec, raw: dict) -> dict:
    """Tighten bounds with the guard when it is linear in a single variable."""
    g = prog.guard.poly
    gvars = g.variables()
    if len(gvars) != 1 or g.degree() != 1:
        return dict(raw)
    (w,) = gvars
    alpha = g.coefficient_in(w, 1).constant_value()
    beta = g.coefficient_in(w, 0).constant_value()
    s = sign_of(alpha)
    if s is None or s == 0:
        return dict(raw)
    edge = ExpPoly.const(canon(-beta / alpha))
    out = dict(raw)
    b = raw[w]
    if s > 0:
        out[w] = BoundPair(_tighter(b.lo, edge, +1), b.hi)
    else:
        out[w] = BoundPair(b.lo, _tighter(b.hi, edge, -1))
    return out


def _tighter(current: ExpPoly, edge: ExpPoly, side: int) -> ExpPoly:
    """Larger of two lower bounds (side=+1) or smaller of two upper bounds."""
    if not current.is_finite:
        return edge
    s = eventual_sign(current - edge)
    if s is Sign.UNKNOWN:
        return edge
    if side > 0:
        return current if s is Sign.POSITIVE else edge
    return current if s is Sign.NEGATIVE else edge
