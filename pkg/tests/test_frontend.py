import random
from pathlib import Path

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from probterm.algebra import Polynomial, symbol
from probterm.distributions import DistSpec
from probterm.errors import ProgramSyntaxError, StructureError, UnknownDistribution
from probterm.frontend import RVExpr, load, load_file, parse, pretty

BENCH = Path(__file__).resolve().parent.parent / "benchmarks"
CORPUS = sorted(p for p in BENCH.iterdir() if p.is_file() and p.name != "manifest.txt")

x, y = Polynomial.var("x"), Polynomial.var("y")
c = symbol("c")


def test_fig2b_tree_shape():
    tree = parse((BENCH / "fig2b").read_text())
    assert [a.target for a in tree.init] == ["x"]
    assert tree.guard.cop == ">"
    (upd,) = tree.body
    assert upd.target == "x"
    assert len(upd.value) == 2
    spec = load((BENCH / "fig2b").read_text())
    (branches,) = [u.branches for _, u in spec.body_updates]
    assert branches == ((x + Polynomial.const(c), sp.Rational(1, 2)), (x - Polynomial.const(c), sp.Rational(1, 2)))


def test_single_branch_has_probability_one():
    spec = load("x = 5\nwhile x > 0:\n    x = x - 1\n")
    ((var, upd),) = spec.body_updates
    assert var == "x"
    assert upd.branches == ((x - 1, sp.Integer(1)),)


def test_init_draw_becomes_distspec():
    spec = load((BENCH / "fig2a").read_text())
    assert spec.init_map["x"] == DistSpec("gauss", (0, 1))
    tree = parse("x = RV(gauss, 0, 1)\nwhile x > 0:\n    x = x - 1\n")
    assert tree.init[0].value == RVExpr("gauss", tree.init[0].value.params)


def test_fig2a_guard_normalization():
    spec = load((BENCH / "fig2a").read_text())
    assert spec.guard.poly == Polynomial.const(c) - x * x - y * y


def test_fig2a_body_structure():
    spec = load((BENCH / "fig2a").read_text())
    assert [v for v, _ in spec.body_rv] == ["s", "t"]
    assert [v for v, _ in spec.body_updates] == ["x", "y"]
    assert spec.symbols == frozenset({"c"})


def test_self_degree_two_rejected():
    with pytest.raises(StructureError) as err:
        load("x = 1\nwhile x > 0:\n    x = x**2 + 1\n")
    assert err.value.variable == "x"
    assert "self-degree 2" in err.value.reason


def test_forward_dependence_rejected():
    with pytest.raises(StructureError) as err:
        load("x = 1\ny = 1\nwhile x > 0:\n    x = y + 1\n    y = x\n")
    assert err.value.variable == "x"
    assert "reads y before its assignment" in err.value.reason


def test_unknown_distribution():
    with pytest.raises(UnknownDistribution):
        load("x = 1\nwhile x > 0:\n    s = RV(poisson, 1)\n    x = x - s\n")


def test_wrong_arity():
    with pytest.raises((ProgramSyntaxError, StructureError)):
        load("x = 1\nwhile x > 0:\n    s = RV(uniform, 1)\n    x = x - s\n")


def test_syntax_error_position():
    with pytest.raises(ProgramSyntaxError) as err:
        load("x = 1\nwhile x > 0:\n    x = x + * 2\n")
    assert err.value.line == 3


def test_guard_reads_uninitialized():
    with pytest.raises(StructureError):
        load("x = 1\nwhile y > 0:\n    x = x - 1\n    y = x\n")


def test_probabilities_must_sum_to_one():
    with pytest.raises(StructureError):
        load("x = 1\nwhile x > 0:\n    x = x + 1 @1/2; x - 1 @1/4\n")


def test_state_dependent_distribution_rejected():
    with pytest.raises(StructureError):
        load("x = 1\nwhile x > 0:\n    s = RV(bernoulli, x)\n    x = x - s\n")


def test_symbolic_probability_records_assumption():
    spec = load((BENCH / "fig2c").read_text())
    assert spec.assumptions
    assert any("e" in str(a) for a in spec.assumptions)


def test_double_assignment_rejected():
    with pytest.raises(StructureError):
        load("x = 1\nwhile x > 0:\n    x = x - 1\n    x = x - 1\n")


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_corpus_round_trip(path):
    spec = load_file(path)
    again = load(pretty(spec))
    assert again == spec
    assert pretty(again) == pretty(spec)


def test_unassigned_names_are_symbols():
    spec = load("x = x0\nwhile x > d:\n    x = x - c\n")
    assert spec.symbols == frozenset({"x0", "c", "d"})


def test_guard_inequality_direction():
    a = load("x = 1\nwhile 3 > x:\n    x = x + 1\n")
    b = load("x = 1\nwhile x < 3:\n    x = x + 1\n")
    assert a.guard.poly == b.guard.poly == 3 - x


# --- fuzz: accepted iff the structural invariant holds ------------------------

def _random_body(rng: random.Random):
    """Random two-variable body and whether it satisfies the language rules."""
    names = ["x", "y"]
    rng.shuffle(names)
    lines, ok = [], True
    for i, v in enumerate(names):
        other = names[1 - i]
        self_deg = rng.choice([0, 1, 1, 2])
        reads_other = rng.random() < 0.5
        terms = [f"{v}**{self_deg}" if self_deg > 1 else v] if self_deg else []
        if reads_other:
            terms.append(f"2*{other}")
            if i == 0:
                ok = False  # the other variable is assigned later
        terms.append("1")
        if self_deg > 1:
            ok = False
        lines.append(f"    {v} = " + " + ".join(terms))
    return lines, ok


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_fuzz_accept_iff_invariant(seed):
    rng = random.Random(seed)
    body, ok = _random_body(rng)
    text = "x = 1\ny = 2\nwhile x + y > 0:\n" + "\n".join(body) + "\n"
    if ok:
        load(text)
    else:
        with pytest.raises(StructureError):
            load(text)


@settings(max_examples=80, deadline=None)
@given(st.text(alphabet="xy+-*=()@;:0123456789 \n", max_size=40))
def test_fuzz_garbage_never_crashes(text):
    try:
        load("x = 1\nwhile x > 0:\n    x = " + text + "\n")
    except (ProgramSyntaxError, StructureError):
        pass
