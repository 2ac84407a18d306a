import dataclasses
from pathlib import Path

import numpy as np
import pytest
import sympy as sp

from probterm.algebra import Polynomial, Trilean, symbol
from probterm.errors import InternalSoundnessError
from probterm.frontend import GuardSpec, load, load_file
from probterm.moments import MomentEngine
from probterm.rules import (
    RULE_ORDER,
    RuleResult,
    analyze,
    combine,
    decide,
    martingale_expression,
    pure_branches,
)
from probterm.simulator import SimConfig, simulate
from soundness import bindings_for

BENCH = Path(__file__).resolve().parent.parent / "benchmarks"
CORPUS = sorted(p for p in BENCH.iterdir() if p.is_file() and p.name != "manifest.txt")
c, e = symbol("c"), symbol("e")
x = Polynomial.var("x")
T, F, U = Trilean.TRUE, Trilean.FALSE, Trilean.UNKNOWN


def rules_of(prog):
    _, _, results, _ = analyze(prog)
    return {r.rule: r for r in results}


def mexp_of(prog):
    return martingale_expression(prog, MomentEngine(prog))


# --- martingale expressions ----------------------------------------------------

def test_fig2b_mexp_and_branches():
    me = mexp_of(load_file(BENCH / "fig2b"))
    assert me.mexp.is_zero()
    deltas = sorted((str(b.delta), b.prob) for b in me.branches)
    assert deltas == [("-c", sp.Rational(1, 2)), ("c", sp.Rational(1, 2))]


def test_fig2c_mexp():
    assert mexp_of(load_file(BENCH / "fig2c")).mexp == Polynomial.const(2 * e * c)


def test_fig2a_mexp():
    me = mexp_of(load_file(BENCH / "fig2a"))
    assert me.mexp == -x * x - x * 11 - sp.Rational(115, 6)


def _fig2a_step(xv, yv, gen, size):
    s = gen.uniform(1, 2, size)
    t = gen.normal(0, 1, size)
    first = gen.random(size) < 0.5
    x1 = np.where(first, xv + s, xv + 2 * s)
    second = gen.random(size) < 0.5
    y1 = np.where(second, yv + x1 + t ** 2, yv - x1 - t ** 2)
    return x1, y1


@pytest.mark.parametrize("state", [(0.5, -1.0), (2.0, 1.5), (-3.0, 0.25)])
def test_fig2a_mexp_matches_monte_carlo_drift(state):
    xv, yv = state
    gen = np.random.default_rng(2024)
    x1, y1 = _fig2a_step(xv, yv, gen, 1_000_000)
    drift = -(x1 ** 2 + y1 ** 2) + (xv ** 2 + yv ** 2)
    me = mexp_of(load_file(BENCH / "fig2a"))
    exact = float(me.mexp.evaluate({"x": sp.nsimplify(xv), "y": sp.nsimplify(yv)}))
    se = drift.std(ddof=1) / np.sqrt(len(drift))
    assert abs(drift.mean() - exact) < 5 * se


def test_pure_branches_restricted_to_guard_cone():
    prog = load("x = 10\nz = 0\nwhile x > 0:\n    z = z + 1 @1/3; z - 1\n    x = x + 1 @1/4; x - 1\n")
    branches = pure_branches(prog)
    assert len(branches) == 2
    assert sum(b.prob for b in branches) == 1


# --- individual rules --------------------------------------------------------------

def test_rsm_fig2a_certified():
    assert rules_of(load_file(BENCH / "fig2a"))["rsm"].certified is T


def test_rsm_fig2b_not_certified():
    assert rules_of(load_file(BENCH / "fig2b"))["rsm"].certified is not T


def test_rsm_biased_walk_epsilon():
    r = rules_of(load("x = x0\nwhile x > 0:\n    x = x + c @1/2; x - 3*c\n"))["rsm"]
    assert r.certified is T
    assert r.witness["MEXP"] == "-c"
    assert r.witness["epsilon"] == "c"


def test_sm_fig2b_witness():
    r = rules_of(load_file(BENCH / "fig2b"))["sm"]
    assert r.certified is T
    assert (r.witness["p"], r.witness["d"]) == ("1/2", "c")


def test_sm_fig2c_not_certified():
    assert rules_of(load_file(BENCH / "fig2c"))["sm"].certified is not T


def test_sm_concrete_gambling_walk():
    r = rules_of(load("x = 10\nwhile x > 0:\n    x = x + 1 @1/2; x - 1\n"))["sm"]
    assert r.certified is T
    assert r.witness["d"] == "1"


def test_rast_fig2c_witness():
    r = rules_of(load_file(BENCH / "fig2c"))["rast"]
    assert r.certified is T
    assert r.witness["epsilon"] == "2*c*e"
    assert r.witness["kappa"] == "c"


def test_rast_fig2b_not_certified():
    assert rules_of(load_file(BENCH / "fig2b"))["rast"].certified is not T


def test_rast_disabled_by_unbounded_noise():
    r = rules_of(load("x = 10\nwhile x > 0:\n    s = RV(gauss, 1, 1)\n    x = x + s\n"))["rast"]
    assert r.applicable is U
    assert r.certified is U


def test_rpast_examples():
    fig2b = rules_of(load_file(BENCH / "fig2b"))["rpast"]
    assert fig2b.certified is T and fig2b.witness["kappa"] == "c"
    assert rules_of(load_file(BENCH / "fig2a"))["rpast"].certified is not T
    assert rules_of(load_file(BENCH / "fig2c"))["rpast"].certified is T


def test_rpast_requires_positive_initial_guard():
    r = rules_of(load("x = -1\nwhile x > 0:\n    x = x + 1 @1/2; x - 1\n"))["rpast"]
    assert r.certified is not T


def test_all_rules_always_run_in_order():
    _, _, results, _ = analyze(load_file(BENCH / "fig2a"))
    assert [r.rule for r in results] == list(RULE_ORDER)


def test_rule_result_round_trip():
    for r in rules_of(load_file(BENCH / "fig2c")).values():
        assert RuleResult.from_dict(r.to_dict()) == r


# --- verdicts ----------------------------------------------------------------------

@pytest.mark.parametrize("name,past,ast", [("fig2a", T, T), ("fig2b", F, T), ("fig2c", F, F)])
def test_fig2_golden_verdicts(name, past, ast):
    v = decide(load_file(BENCH / name))
    assert (v.past, v.ast) == (past, ast)


def test_combine_applies_closure():
    past_yes = RuleResult("rsm", T, T, {})
    v = combine([past_yes])
    assert (v[0], v[1]) == (T, T)
    ast_no = RuleResult("rast", T, T, {})
    v = combine([ast_no])
    assert (v[0], v[1]) == (F, F)


def test_combine_conflict_raises():
    with pytest.raises(InternalSoundnessError):
        combine([RuleResult("rsm", T, T, {}), RuleResult("rast", T, T, {})])


def test_decide_degrades_analysis_errors_to_maybe():
    prog = load("x = 1\nwhile x > 0:\n    s = RV(hypergeometric, 10, 4, 3)\n    x = x - s**3\n")
    v = decide(prog)
    assert (v.past, v.ast) == (U, U)
    assert v.notes


def test_assumptions_echoed():
    v = decide(load_file(BENCH / "fig2c"))
    assert v.assumptions


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_closure_and_mutual_exclusion(path):
    prog = load_file(path)
    v = decide(prog)
    if v.past is T:
        assert v.ast is T
    if v.ast is F:
        assert v.past is F
    r = rules_of(prog)
    assert not (r["rsm"].certified is T and r["rpast"].certified is T)
    assert not (r["sm"].certified is T and r["rast"].certified is T)
    for rule in r.values():
        if rule.certified is T:
            assert rule.applicable is T


def _scaled(prog, factor):
    g = prog.guard
    guard = GuardSpec(g.lhs.scale(factor), g.cop, g.rhs.scale(factor), g.poly.scale(factor))
    return dataclasses.replace(prog, guard=guard)


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_guard_scale_invariance(path):
    prog = load_file(path)
    base = {k: r.certified for k, r in rules_of(prog).items()}
    for factor in (2, sp.Rational(1, 3)):
        scaled = {k: r.certified for k, r in rules_of(_scaled(prog, factor)).items()}
        assert scaled == base


def test_scale_invariance_on_source_text():
    a = decide(load("x = 10\nwhile x > 0:\n    x = x + 1 @1/4; x - 1\n"))
    b = decide(load("x = 10\nwhile 2*x > 0:\n    x = x + 1 @1/4; x - 1\n"))
    assert (a.past, a.ast) == (b.past, b.ast) == (T, T)


# --- statistical consistency ---------------------------------------------------------

def _decided(path):
    prog = load_file(path)
    return prog, decide(prog)


PAST_YES = [p for p in CORPUS if _decided(p)[1].past is T]
AST_NO = [p for p in CORPUS if _decided(p)[1].ast is F]


@pytest.mark.parametrize("path", PAST_YES, ids=lambda p: p.name)
def test_past_programs_have_stable_mean_steps(path):
    prog = load_file(path)
    bindings = bindings_for(prog)
    if path.name == "fig2a":
        bindings = {"c": 4}
    short = simulate(prog, SimConfig(bindings, 2000, 10_000, 3))
    long = simulate(prog, SimConfig(bindings, 2000, 100_000, 3))
    assert short.terminated > 0
    m1, m2 = float(short.mean_steps_terminated), float(long.mean_steps_terminated)
    assert abs(m2 - m1) <= 0.1 * m1


@pytest.mark.parametrize("path", AST_NO, ids=lambda p: p.name)
def test_non_ast_programs_keep_escaping(path):
    prog = load_file(path)
    report = simulate(prog, SimConfig(bindings_for(prog), 200, 1_000_000, 5))
    assert float(report.termination_rate) <= 0.95
