"""Closed forms for expected values of monomials as functions of the loop counter.

The loop body is treated as an unconditional stochastic recurrence: the guard
is ignored and ``E[m_n]`` is the expectation of monomial ``m`` after ``n`` body
executions.  Because each variable depends at most linearly on itself, the
one-step expectation of a monomial mentions itself (with a constant factor)
plus strictly smaller monomials, so a finite basis closes and every closed
form solves a first-order recurrence with an exponential-polynomial
inhomogeneous part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra.exppoly import ExpPoly, solve_recurrence
from .algebra.polynomial import UNIT, Monomial, Polynomial, mono_str
from .algebra.symbolic import ONE, ZERO, canon
from .distributions import DEFAULT_MAX_MOMENT, DistSpec, raw_moment
from .errors import BasisExplosion, MomentUnavailable, StructureError
from .frontend import BranchUpdate, ProgramSpec

DEFAULT_BASIS_CAP = 1000


@dataclass
class ClosedFormTable:
    forms: dict = field(default_factory=dict)  # monomial -> ExpPoly
    initial: dict = field(default_factory=dict)  # monomial -> constant

    def __getitem__(self, m: Monomial) -> ExpPoly:
        return self.forms[m]

    def __contains__(self, m) -> bool:
        return m in self.forms

    def expectation(self, p: Polynomial) -> ExpPoly:
        total = ExpPoly()
        for m, c in p.items():
            total = total + (ExpPoly.const(1) if m == UNIT else self.forms[m]).scale(c)
        return total


class MomentEngine:
    """Single-program analysis session with memoized one-step expectations."""

    def __init__(self, prog: ProgramSpec, max_moment: int = DEFAULT_MAX_MOMENT,
                 basis_cap: int = DEFAULT_BASIS_CAP):
        self.prog = prog
        self.max_moment = max_moment
        self.basis_cap = basis_cap
        self._updates: dict[Monomial, Polynomial] = {}
        self._table = ClosedFormTable()
        self._branch_powers: dict = {}

    # one-step expectation ---------------------------------------------------
    def _moment(self, m, var: str, dist: DistSpec, k: int):
        value = raw_moment(dist, k, self.max_moment)
        if value is None:
            raise MomentUnavailable(mono_str(m), str(dist), k)
        return Polynomial.const(value)

    def _mixture_power(self, var: str, upd: BranchUpdate, k: int) -> Polynomial:
        key = (var, k)
        if key not in self._branch_powers:
            total = Polynomial()
            for poly, p in upd.branches:
                total = total + (poly ** k).scale(p)
            self._branch_powers[key] = total
        return self._branch_powers[key]

    def expected_polynomial(self, poly: Polynomial, origin=None) -> Polynomial:
        """``E[poly(next state) | current state]`` for an arbitrary polynomial."""
        for var, stmt in reversed(self.prog.statements()):
            if isinstance(stmt, DistSpec):
                poly = poly.substitute_powers(var, lambda k, v=var, d=stmt: self._moment(origin or (), v, d, k))
            else:
                poly = poly.substitute_powers(var, lambda k, v=var, u=stmt: self._mixture_power(v, u, k))
        return poly

    def expected_update(self, m: Monomial) -> Polynomial:
        if m not in self._updates:
            self._updates[m] = self.expected_polynomial(Polynomial({m: ONE}), origin=m)
        return self._updates[m]

    # basis ------------------------------------------------------------------
    def build_basis(self, seeds) -> list:
        """Dependency-closed monomials; each entry only needs entries after it."""
        seeds = [m for m in seeds if m != UNIT]
        deps: dict[Monomial, list] = {}
        work = list(seeds)
        while work:
            m = work.pop()
            if m in deps:
                continue
            if len(deps) >= self.basis_cap:
                raise BasisExplosion(f"monomial basis exceeds {self.basis_cap} entries")
            succ = [m2 for m2 in self.expected_update(m).monomials() if m2 not in (UNIT, m)]
            deps[m] = succ
            work.extend(s for s in succ if s not in deps)
        # reverse post-order DFS: every monomial precedes the ones it needs
        order: list = []
        state: dict = {}

        def visit(m):
            stack = [(m, iter(deps[m]))]
            state[m] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    stack.pop()
                    state[node] = 2
                    order.append(node)
                elif state.get(nxt) == 1:
                    raise BasisExplosion(f"cyclic moment dependency through {mono_str(nxt)}")
                elif nxt not in state:
                    state[nxt] = 1
                    stack.append((nxt, iter(deps[nxt])))

        for m in sorted(deps):
            if m not in state:
                visit(m)
        order.reverse()
        return order

    # closed forms -----------------------------------------------------------
    def initial_moment(self, m: Monomial):
        init = self.prog.init_map
        value = ONE
        for var, e in m:
            if var not in init:
                raise StructureError(var, "initial value needed but the variable is never initialized")
            v0 = init[var]
            if isinstance(v0, DistSpec):
                mom = raw_moment(v0, e, self.max_moment)
                if mom is None:
                    raise MomentUnavailable(mono_str(m), str(v0), e)
                value = value * mom
            else:
                value = value * v0 ** e
        return canon(value)

    def closed_forms(self, basis) -> ClosedFormTable:
        for m in reversed(basis):
            if m in self._table.forms:
                continue
            upd = self.expected_update(m)
            a = upd.coeff(m)
            g = ExpPoly.const(upd.coeff(UNIT))
            for m2, c in upd.items():
                if m2 in (m, UNIT):
                    continue
                g = g + self._table.forms[m2].scale(c)
            init = self.initial_moment(m)
            self._table.forms[m] = solve_recurrence(a, g, init)
            self._table.initial[m] = init
        return self._table

    def closed_form(self, m: Monomial) -> ExpPoly:
        if m == UNIT:
            return ExpPoly.const(1)
        if m not in self._table.forms:
            self.closed_forms(self.build_basis([m]))
        return self._table.forms[m]

    def expectation(self, p: Polynomial) -> ExpPoly:
        """Closed form of ``E[p(state after n iterations)]``."""
        self.closed_forms(self.build_basis(p.monomials()))
        return self._table.expectation(p)

    @property
    def table(self) -> ClosedFormTable:
        return self._table


def expected_update(m: Monomial, prog: ProgramSpec) -> Polynomial:
    return MomentEngine(prog).expected_update(m)


def build_basis(seeds, prog: ProgramSpec) -> list:
    return MomentEngine(prog).build_basis(seeds)


def closed_forms(basis, prog: ProgramSpec) -> ClosedFormTable:
    return MomentEngine(prog).closed_forms(basis)
