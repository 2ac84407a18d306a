"""Proof rules for (non-)termination and the verdict orchestrator.

Every rule analyses the guard polynomial ``G`` (the loop runs while ``G > 0``)
through its martingale expression ``MEXP = E[G(next) - G | state]``.  Signs are
decided asymptotically: ``MEXP`` is bounded over the reachable iterating
states by substituting the variables' bounding functions, and the eventual
sign of the resulting exponential-polynomial endpoint settles the rule.

Rules:

* ``rsm``   ranking supermartingale, certifies PAST
* ``sm``    supermartingale with a decreasing branch, certifies AST
* ``rast``  repulsing supermartingale with bounded differences, certifies non-AST
* ``rpast`` submartingale with bounded differences, certifies non-PAST
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from .algebra.exppoly import ExpPoly, Sign, compare_growth, eventual_sign, is_bounded, leading_term
from .algebra.intervals import poly_eval_bounds
from .algebra.polynomial import Polynomial
from .algebra.symbolic import ONE, Trilean, abs_const, canon, max_const, sign_of, sym_sign, to_str
from .bounds import BoundStore, guard_refined_bounds
from .distributions import DistSpec, raw_moment
from .errors import AnalysisError, InternalSoundnessError, MomentUnavailable, StructureError
from .frontend import ProgramSpec
from .moments import MomentEngine

MAX_PURE_BRANCHES = 4096
RULE_ORDER = ("rsm", "sm", "rast", "rpast")
RULE_TITLES = {
    "rsm": "ranking supermartingale",
    "sm": "supermartingale",
    "rast": "repulsing supermartingale",
    "rpast": "bounded-difference submartingale",
}
# (property, polarity) certified by each rule
RULE_CLAIMS = {"rsm": ("PAST", True), "sm": ("AST", True), "rast": ("AST", False), "rpast": ("PAST", False)}


@dataclass(frozen=True)
class PureBranch:
    """One choice per relevant probabilistic assignment.

    ``choices`` lists ``(variable, branch index)``; assignments that cannot
    influence the guard are left out, so each pure branch stands for the union
    of the full choice vectors that agree on the relevant ones.
    """

    choices: tuple
    prob: object
    delta: Polynomial
    delta_avg: Polynomial

    def label(self) -> str:
        return ", ".join(f"{v}#{i + 1}" for v, i in self.choices) or "(deterministic)"


@dataclass(frozen=True)
class MartingaleExpression:
    guard: Polynomial
    mexp: Polynomial
    branches: tuple | None  # None when there are too many to enumerate


@dataclass
class RuleResult:
    rule: str
    applicable: Trilean
    certified: Trilean
    witness: dict = field(default_factory=dict)

    @property
    def claim(self):
        return RULE_CLAIMS[self.rule]

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "title": RULE_TITLES[self.rule],
            "applicable": _tri_word(self.applicable),
            "certified": _tri_word(self.certified),
            "witness": dict(self.witness),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RuleResult":
        return cls(d["rule"], _tri_from_word(d["applicable"]), _tri_from_word(d["certified"]), dict(d["witness"]))


@dataclass
class Verdict:
    past: Trilean
    ast: Trilean
    witnesses: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    phases: dict = field(default_factory=dict)


def answer(t: Trilean) -> str:
    return {Trilean.TRUE: "Yes", Trilean.FALSE: "No", Trilean.UNKNOWN: "Maybe"}[t]


def parse_answer(word: str) -> Trilean:
    return {"Yes": Trilean.TRUE, "No": Trilean.FALSE, "Maybe": Trilean.UNKNOWN}[word]


def _tri_word(t: Trilean) -> str:
    return t.name.lower()


def _tri_from_word(w: str) -> Trilean:
    return Trilean[w.upper()]


# --- martingale expression ---------------------------------------------------------

def _guard_cone(prog: ProgramSpec) -> set:
    """Variables whose assignment in the body can change the next guard value."""
    cone = set(prog.guard.poly.variables())
    for var, stmt in reversed(prog.statements()):
        if var in cone and not isinstance(stmt, DistSpec):
            for poly, _p in stmt.branches:
                cone |= poly.variables()
    return cone


def _average_draws(prog: ProgramSpec, poly: Polynomial) -> Polynomial:
    for var, stmt in prog.statements():
        if isinstance(stmt, DistSpec):
            def moment(k, v=var, d=stmt):
                value = raw_moment(d, k)
                if value is None:
                    raise MomentUnavailable(v, str(d), k)
                return Polynomial.const(value)

            poly = poly.substitute_powers(var, moment)
    return poly


def pure_branches(prog: ProgramSpec, cap: int = MAX_PURE_BRANCHES):
    g = prog.guard.poly
    cone = _guard_cone(prog)
    relevant = [(v, s) for v, s in prog.statements() if not isinstance(s, DistSpec) and v in cone]
    total = 1
    for _v, s in relevant:
        total *= len(s.branches)
        if total > cap:
            return None
    stmts = prog.statements()
    out = []
    for pick in itertools.product(*[range(len(s.branches)) for _v, s in relevant]):
        chosen = {v: i for (v, _s), i in zip(relevant, pick)}
        poly = g
        prob = ONE
        for var, stmt in reversed(stmts):
            if var in chosen:
                branch_poly, p = stmt.branches[chosen[var]]
                poly = poly.substitute(var, branch_poly)
                prob = prob * p
        delta = poly - g
        out.append(PureBranch(tuple(chosen.items()), canon(prob), delta, _average_draws(prog, delta)))
    return tuple(out)


def martingale_expression(prog: ProgramSpec, engine: MomentEngine | None = None) -> MartingaleExpression:
    engine = engine or MomentEngine(prog)
    g = prog.guard.poly
    mexp = engine.expected_polynomial(g) - g
    return MartingaleExpression(g, mexp, pure_branches(prog))


# --- helpers -----------------------------------------------------------------------

_CONST_TERM = (0, ONE)


def _negative_gap(f: ExpPoly):
    """A constant ``d > 0`` with ``f <= -d`` eventually, or None."""
    if not f.is_finite:
        return ONE if f.inf < 0 else None
    if eventual_sign(f) is not Sign.NEGATIVE:
        return None
    lead = leading_term(f)
    if lead == _CONST_TERM:
        kappa = canon(-f.terms[lead])
        if eventual_sign(f + ExpPoly.const(kappa)) in (Sign.NEGATIVE, Sign.ZERO):
            return kappa
        return canon(kappa / 2)
    if compare_growth(lead, _CONST_TERM) == 1:
        return ONE
    return None


def _abs_bound(f: ExpPoly):
    """A constant bounding ``|f|`` eventually, or None."""
    if not f.is_finite or is_bounded(f) is not Trilean.TRUE:
        return None
    f = f.eventual()
    parts = []
    for term, c in f.items():
        a = abs_const(c)
        if a is None:
            return None
        parts.append(a)
    return canon(sum(parts, start=canon(0)))


def _bounded_differences(branches, bounds):
    """Constant ``kappa`` with ``|Delta_beta| <= kappa`` for all branches, or None."""
    if branches is None:
        return None, "too many pure branches"
    kappas = []
    for br in branches:
        iv = poly_eval_bounds(br.delta, bounds)
        lo, hi = _abs_bound(iv.lo), _abs_bound(iv.hi)
        if lo is None or hi is None:
            return None, f"change of G on branch {br.label()} is not bounded: {iv}"
        kappas.append(max_const([lo, hi]))
    if any(k is None for k in kappas):
        return None, "difference bounds are incomparable"
    kappa = max_const(kappas) if kappas else canon(0)
    if kappa is None:
        return None, "difference bounds are incomparable"
    return kappa, None


def initial_guard_positive(prog: ProgramSpec, engine: MomentEngine) -> Trilean:
    """Is ``G > 0`` at loop entry with positive probability?"""
    g = prog.guard.poly
    try:
        mean = sum((c * engine.initial_moment(m) for m, c in g.items()), start=canon(0))
    except (AnalysisError, StructureError):
        return Trilean.UNKNOWN
    mean = canon(mean)
    if sym_sign(mean) is Trilean.TRUE:
        return Trilean.TRUE
    random = any(isinstance(prog.init_map.get(v), DistSpec) for v in g.variables())
    if not random and sign_of(mean) is not None and sign_of(mean) <= 0:
        return Trilean.FALSE
    return Trilean.UNKNOWN


def _base_witness(me: MartingaleExpression) -> dict:
    return {"G": str(me.guard), "MEXP": str(me.mexp)}


# --- rules -------------------------------------------------------------------------

def rsm_rule(prog, me: MartingaleExpression, bounds: dict) -> RuleResult:
    hi = poly_eval_bounds(me.mexp, bounds).hi
    w = _base_witness(me)
    w["MEXP upper bound"] = str(hi)
    sign = eventual_sign(hi)
    if sign is Sign.UNKNOWN or not hi.is_finite and hi.inf > 0:
        return RuleResult("rsm", Trilean.UNKNOWN, Trilean.UNKNOWN, w)
    eps = _negative_gap(hi)
    if eps is None:
        return RuleResult("rsm", Trilean.TRUE, Trilean.FALSE, w)
    w["epsilon"] = to_str(eps)
    return RuleResult("rsm", Trilean.TRUE, Trilean.TRUE, w)


def sm_rule(prog, me: MartingaleExpression, bounds: dict) -> RuleResult:
    hi = poly_eval_bounds(me.mexp, bounds).hi
    w = _base_witness(me)
    w["MEXP upper bound"] = str(hi)
    sign = eventual_sign(hi)
    if sign is Sign.UNKNOWN:
        return RuleResult("sm", Trilean.UNKNOWN, Trilean.UNKNOWN, w)
    if sign is Sign.POSITIVE:
        return RuleResult("sm", Trilean.TRUE, Trilean.FALSE, w)
    if me.branches is None:
        w["reason"] = "too many pure branches"
        return RuleResult("sm", Trilean.TRUE, Trilean.UNKNOWN, w)
    for br in me.branches:
        if sym_sign(br.prob) is not Trilean.TRUE:
            continue
        d = _negative_gap(poly_eval_bounds(br.delta, bounds).hi)
        if d is not None:
            w.update({"branch": br.label(), "p": to_str(br.prob), "d": to_str(d)})
            return RuleResult("sm", Trilean.TRUE, Trilean.TRUE, w)
    w["reason"] = "no branch with certified probability decreases G by a constant"
    return RuleResult("sm", Trilean.TRUE, Trilean.UNKNOWN, w)


def rast_rule(prog, me: MartingaleExpression, bounds: dict, g0_positive: Trilean = Trilean.TRUE) -> RuleResult:
    lo = poly_eval_bounds(me.mexp, bounds).lo
    w = _base_witness(me)
    w["MEXP lower bound"] = str(lo)
    sign = eventual_sign(lo)
    if sign is Sign.UNKNOWN or not lo.is_finite:
        return RuleResult("rast", Trilean.UNKNOWN, Trilean.UNKNOWN, w)
    eps = _negative_gap(-lo)
    if eps is None:
        return RuleResult("rast", Trilean.TRUE, Trilean.FALSE, w)
    w["epsilon"] = to_str(eps)
    kappa, why = _bounded_differences(me.branches, bounds)
    if kappa is None:
        w["reason"] = why
        return RuleResult("rast", Trilean.UNKNOWN, Trilean.UNKNOWN, w)
    w["kappa"] = to_str(kappa)
    if g0_positive is not Trilean.TRUE:
        w["reason"] = "initial guard value is not certainly positive"
        return RuleResult("rast", Trilean.TRUE, g0_positive & Trilean.UNKNOWN, w)
    return RuleResult("rast", Trilean.TRUE, Trilean.TRUE, w)


def rpast_rule(prog, me: MartingaleExpression, bounds: dict, g0_positive: Trilean = Trilean.TRUE) -> RuleResult:
    w = _base_witness(me)
    if me.mexp.is_zero():
        w["MEXP lower bound"] = "0"
    else:
        lo = poly_eval_bounds(me.mexp, bounds).lo
        w["MEXP lower bound"] = str(lo)
        sign = eventual_sign(lo)
        if sign is Sign.UNKNOWN or not lo.is_finite:
            return RuleResult("rpast", Trilean.UNKNOWN, Trilean.UNKNOWN, w)
        if sign is Sign.NEGATIVE:
            return RuleResult("rpast", Trilean.TRUE, Trilean.FALSE, w)
    kappa, why = _bounded_differences(me.branches, bounds)
    if kappa is None:
        w["reason"] = why
        return RuleResult("rpast", Trilean.UNKNOWN, Trilean.UNKNOWN, w)
    w["kappa"] = to_str(kappa)
    if g0_positive is not Trilean.TRUE:
        w["reason"] = "initial guard value is not certainly positive"
        return RuleResult("rpast", Trilean.TRUE, g0_positive & Trilean.UNKNOWN, w)
    return RuleResult("rpast", Trilean.TRUE, Trilean.TRUE, w)


# --- orchestration -----------------------------------------------------------------

def combine(results) -> tuple:
    """Fold rule results into (past, ast) with logical closure."""
    past_yes = past_no = ast_yes = ast_no = False
    for r in results:
        if r.certified is not Trilean.TRUE:
            continue
        prop, positive = r.claim
        if prop == "PAST":
            past_yes |= positive
            past_no |= not positive
        else:
            ast_yes |= positive
            ast_no |= not positive
    ast_yes |= past_yes
    past_no |= ast_no
    if (past_yes and past_no) or (ast_yes and ast_no):
        fired = [r.rule for r in results if r.certified is Trilean.TRUE]
        raise InternalSoundnessError(f"contradictory certificates from rules {fired}")

    def tri(yes, no):
        return Trilean.TRUE if yes else Trilean.FALSE if no else Trilean.UNKNOWN

    return tri(past_yes, past_no), tri(ast_yes, ast_no)


def analyze(prog: ProgramSpec):
    """Run the full pipeline; returns (MartingaleExpression, refined bounds, results, phases)."""
    phases = {}
    t0 = time.perf_counter()
    engine = MomentEngine(prog)
    me = martingale_expression(prog, engine)
    g0 = initial_guard_positive(prog, engine)
    t1 = time.perf_counter()
    phases["moments_ms"] = (t1 - t0) * 1000
    store = BoundStore(prog)
    refined = guard_refined_bounds(prog, store.all_bounds())
    bounds = {v: b.interval for v, b in refined.items()}
    t2 = time.perf_counter()
    phases["bounds_ms"] = (t2 - t1) * 1000
    results = [
        rsm_rule(prog, me, bounds),
        sm_rule(prog, me, bounds),
        rast_rule(prog, me, bounds, g0),
        rpast_rule(prog, me, bounds, g0),
    ]
    phases["rules_ms"] = (time.perf_counter() - t2) * 1000
    return me, bounds, results, phases


def decide(prog: ProgramSpec) -> Verdict:
    assumptions = [str(a) for a in prog.assumptions]
    try:
        _me, _bounds, results, phases = analyze(prog)
    except AnalysisError as exc:
        return Verdict(Trilean.UNKNOWN, Trilean.UNKNOWN, [], assumptions,
                       [f"{type(exc).__name__}: {exc}"],
                       {"moments_ms": 0.0, "bounds_ms": 0.0, "rules_ms": 0.0})
    past, ast = combine(results)
    return Verdict(past, ast, results, assumptions, [], phases)
