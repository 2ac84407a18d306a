"""Lexer, parser and structural validation for single-loop programs.

Input is line based: an initialization section, one ``while`` line, and a loop
body made of every remaining line.  Indentation is not significant and lines
starting with ``#`` are comments::

    x = RV(gauss, 0, 1)
    while x**2 < c:
        s = RV(uniform, 1, 2)
        x = x + s @1/2; x + 2*s
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import sympy as sp

from .algebra.polynomial import Polynomial
from .algebra.symbolic import ONE, ZERO, canon, is_numeric, sign_of, sym_sign, symbol, to_str, Trilean
from .distributions import ARITY, DistSpec
from .errors import ProgramSyntaxError, StructureError, UnknownDistribution

# --- syntax tree -------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Name:
    id: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Name, Neg, BinOp]


@dataclass(frozen=True)
class RVExpr:
    dist: str
    params: tuple


@dataclass(frozen=True)
class Branch:
    expr: Expr
    prob: Expr | None


@dataclass(frozen=True)
class Assign:
    target: str
    value: Union[RVExpr, Expr, tuple]  # tuple of Branch inside the loop body
    line: int


@dataclass(frozen=True)
class GuardNode:
    lhs: Expr
    cop: str
    rhs: Expr
    line: int


@dataclass(frozen=True)
class ProgramTree:
    init: tuple
    guard: GuardNode
    body: tuple


# --- lexer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<dist>chi-squared)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/()@;,:<>=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize_line(text: str, line: int) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ProgramSyntaxError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token("name" if kind == "dist" else kind, m.group(), line, pos + 1))
        pos = m.end()
    tokens.append(Token("eol", "", line, len(text) + 1))
    return tokens


class _LineParser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        found = tok.text or "end of line"
        raise ProgramSyntaxError(f"{msg} (found {found!r})", tok.line, tok.col)

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def expect_name(self) -> Token:
        tok = self.tok
        if tok.kind != "name":
            self.error("expected a name")
        self.i += 1
        return tok

    def at_eol(self):
        return self.tok.kind == "eol"

    def expect_eol(self):
        if not self.at_eol():
            self.error("unexpected trailing input")

    # expressions ------------------------------------------------------------
    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("**"):
            return BinOp("**", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(Fraction(tok.text))
        if tok.kind == "name":
            if tok.text == "RV":
                self.error("RV(...) may only appear as the whole right-hand side of an assignment")
            self.i += 1
            return Name(tok.text, tok.line, tok.col)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.error("expected an expression")

    def rv_expr(self) -> RVExpr:
        self.expect_name()  # RV
        self.expect("(")
        tok = self.expect_name()
        if tok.text not in ARITY:
            raise UnknownDistribution(f"unknown distribution {tok.text!r}", tok.line, tok.col)
        params = []
        while self.accept(","):
            params.append(self.expr())
        self.expect(")")
        if len(params) != ARITY[tok.text]:
            raise ProgramSyntaxError(
                f"{tok.text} takes {ARITY[tok.text]} parameters, got {len(params)}", tok.line, tok.col
            )
        return RVExpr(tok.text, tuple(params))

    def branches(self) -> tuple:
        out = []
        while True:
            e = self.expr()
            prob = None
            if self.accept("@"):
                prob = self.expr()
            out.append(Branch(e, prob))
            if self.accept(";"):
                if prob is None:
                    self.error("every branch except the last needs a probability '@'")
                continue
            break
        return tuple(out)

    def is_rv(self):
        return self.tok.kind == "name" and self.tok.text == "RV"


def parse(text: str) -> ProgramTree:
    """Parse program text into a syntax tree (no semantic checks)."""
    init: list[Assign] = []
    body: list[Assign] = []
    guard = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = tokenize_line(raw, lineno)
        p = _LineParser(tokens)
        if tokens[0].kind == "name" and tokens[0].text == "while":
            if guard is not None:
                p.error("only a single loop is supported", tokens[0])
            p.i = 1
            lhs = p.expr()
            if not (p.tok.kind == "op" and p.tok.text in ("<", ">")):
                p.error("expected '<' or '>'")
            cop = p.tok.text
            p.i += 1
            rhs = p.expr()
            p.expect(":")
            p.expect_eol()
            guard = GuardNode(lhs, cop, rhs, lineno)
            continue
        target = p.expect_name()
        if target.text in ("while", "RV"):
            p.error("expected an assignment", target)
        p.expect("=")
        if p.is_rv():
            value = p.rv_expr()
        elif guard is None:
            value = p.expr()
        else:
            value = p.branches()
        p.expect_eol()
        (init if guard is None else body).append(Assign(target.text, value, lineno))
    if guard is None:
        raise ProgramSyntaxError("missing 'while' loop", None, None)
    if not body:
        raise ProgramSyntaxError("the loop body is empty", guard.line, 1)
    return ProgramTree(tuple(init), guard, tuple(body))


# --- validated program -------------------------------------------------------


@dataclass(frozen=True)
class Assumption:
    """Constraint ``expr >= 0`` (or ``== 0`` for sums) that positivity alone cannot verify."""

    expr: sp.Expr
    relation: str
    origin: str

    def __str__(self):
        return f"{to_str(self.expr)} {self.relation} 0  ({self.origin})"


@dataclass(frozen=True)
class BranchUpdate:
    branches: tuple  # of (Polynomial, probability)

    def __str__(self):
        if len(self.branches) == 1:
            return str(self.branches[0][0])
        return "; ".join(f"{poly} @{to_str(p)}" for poly, p in self.branches)


@dataclass(frozen=True)
class GuardSpec:
    lhs: Polynomial
    cop: str
    rhs: Polynomial
    poly: Polynomial  # loop iterates while poly > 0


@dataclass(frozen=True)
class ProgramSpec:
    init: tuple  # (var, SymExpr | DistSpec)
    guard: GuardSpec
    body_rv: tuple  # (var, DistSpec)
    body_updates: tuple  # (var, BranchUpdate)
    symbols: frozenset
    assumptions: tuple = ()
    variables: tuple = field(default=(), compare=False)

    @property
    def init_map(self) -> dict:
        return dict(self.init)

    @property
    def rv_map(self) -> dict:
        return dict(self.body_rv)

    @property
    def update_map(self) -> dict:
        return dict(self.body_updates)

    def statements(self):
        """Loop body in execution order: rv draws (hoisted) then updates."""
        return [(v, d) for v, d in self.body_rv] + [(v, u) for v, u in self.body_updates]

    def state_variables(self) -> list[str]:
        seen = []
        for v, _ in self.init:
            seen.append(v)
        for v, _ in self.statements():
            if v not in seen:
                seen.append(v)
        return seen


class _Converter:
    def __init__(self, variables: set[str]):
        self.variables = variables
        self.symbols: set[str] = set()

    def const(self, node: Expr, what: str):
        poly = self.poly(node)
        if poly.variables():
            v = sorted(poly.variables())[0]
            raise StructureError(v, f"{what} must be a constant expression, but reads program variable {v}")
        return poly.constant_value()

    def poly(self, node: Expr) -> Polynomial:
        if isinstance(node, Num):
            return Polynomial.const(sp.Rational(node.value.numerator, node.value.denominator))
        if isinstance(node, Name):
            if node.id in self.variables:
                return Polynomial.var(node.id)
            self.symbols.add(node.id)
            return Polynomial.const(symbol(node.id))
        if isinstance(node, Neg):
            return -self.poly(node.operand)
        if isinstance(node, BinOp):
            left = self.poly(node.left)
            if node.op == "**":
                exp = self.poly(node.right)
                if exp.variables() or not exp.constant_value().is_Integer:
                    raise StructureError(_first_name(node.right), "exponents must be integer constants")
                k = int(exp.constant_value())
                if k < 0:
                    if left.variables():
                        raise StructureError(sorted(left.variables())[0], "negative power of a program variable")
                    return Polynomial.const(self._checked_inverse(left.constant_value()) ** (-k))
                return left ** k
            right = self.poly(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if node.op == "/":
                if right.variables():
                    v = sorted(right.variables())[0]
                    raise StructureError(v, "division by a program variable is not polynomial")
                return left.scale(self._checked_inverse(right.constant_value()))
        raise TypeError(node)  # pragma: no cover

    @staticmethod
    def _checked_inverse(c):
        if sign_of(c) in (1, -1):
            return canon(1 / c)
        raise StructureError(to_str(c), "division by a constant that may be zero")


def _first_name(node) -> str:
    if isinstance(node, Name):
        return node.id
    for child in getattr(node, "__dict__", {}).values():
        if isinstance(child, (Name, Neg, BinOp)):
            return _first_name(child)
    return "<const>"


def _check_probabilities(target: str, probs: list, assumptions: list):
    total = canon(sp.Add(*probs))
    for p in probs:
        for expr, what in ((p, "probability >= 0"), (canon(1 - p), "probability <= 1")):
            if expr == 0 or sym_sign(expr) is Trilean.TRUE:
                continue
            if is_numeric(expr):
                raise StructureError(target, f"branch probability {to_str(p)} is outside [0, 1]")
            assumptions.append(Assumption(expr, ">=", f"{target}: {what}"))
    if total != 1:
        if is_numeric(total):
            raise StructureError(target, f"branch probabilities sum to {to_str(total)}, not 1")
        assumptions.append(Assumption(canon(total - 1), "==", f"{target}: probabilities sum to 1"))


def _check_dist_params(target: str, dist: DistSpec):
    """Reject concrete parameters that are out of range; symbolic ones pass."""
    kind, p = dist.kind, dist.params
    bad = None
    if kind == "bernoulli" and is_numeric(p[0]) and not 0 <= p[0] <= 1:
        bad = "probability outside [0, 1]"
    elif kind in ("binomial", "geometric") and is_numeric(p[-1]) and not 0 < p[-1] <= 1:
        bad = "probability outside (0, 1]"
    elif kind == "binomial" and is_numeric(p[0]) and not (p[0].is_Integer and p[0] >= 0):
        bad = "number of trials must be a nonnegative integer"
    elif kind == "uniform" and is_numeric(p[1] - p[0]) and p[1] < p[0]:
        bad = "upper endpoint below lower endpoint"
    elif kind == "gauss" and is_numeric(p[1]) and p[1] < 0:
        bad = "negative variance"
    if bad:
        raise StructureError(target, f"invalid parameters for {kind}: {bad}")


def validate(tree: ProgramTree) -> ProgramSpec:
    """Check the structural constraints and build the normalized program."""
    assigned = {a.target for a in tree.init} | {a.target for a in tree.body}
    conv = _Converter(assigned)

    init = []
    initialized: set[str] = set()
    for a in tree.init:
        if a.target in initialized:
            raise StructureError(a.target, "initialized twice")
        if isinstance(a.value, RVExpr):
            init.append((a.target, _dist(conv, a.target, a.value)))
        else:
            init.append((a.target, conv.const(a.value, "an initial value")))
        initialized.add(a.target)

    lhs, rhs = conv.poly(tree.guard.lhs), conv.poly(tree.guard.rhs)
    g = lhs - rhs if tree.guard.cop == ">" else rhs - lhs
    for v in sorted(g.variables()):
        if v not in initialized:
            raise StructureError(v, "read by the loop guard but never initialized")

    body_targets = [a.target for a in tree.body]
    for t in body_targets:
        if body_targets.count(t) > 1:
            raise StructureError(t, "assigned more than once in the loop body")

    body_rv = []
    updates = []
    assumptions: list[Assumption] = []
    done: set[str] = set()
    for idx, a in enumerate(tree.body):
        later = set(body_targets[idx + 1:])
        if isinstance(a.value, RVExpr):
            body_rv.append((a.target, _dist(conv, a.target, a.value)))
            done.add(a.target)
            continue
        branches = []
        probs = []
        for i, br in enumerate(a.value):
            poly = conv.poly(br.expr)
            for v in sorted(poly.variables()):
                if v == a.target:
                    continue
                if v in later:
                    raise StructureError(a.target, f"reads {v} before its assignment")
                if v not in done and v not in initialized:
                    raise StructureError(a.target, f"reads unassigned variable {v}")
            deg = poly.degree(a.target)
            if deg > 1:
                raise StructureError(a.target, f"self-degree {deg}: updates may depend at most linearly on themselves")
            if deg == 1 and a.target not in initialized:
                raise StructureError(a.target, "reads itself but is never initialized")
            if br.prob is not None:
                probs.append(conv.const(br.prob, "a branch probability"))
            elif i == len(a.value) - 1:
                probs.append(canon(1 - sp.Add(*probs)))
            branches.append(poly)
        _check_probabilities(a.target, probs, assumptions)
        updates.append((a.target, BranchUpdate(tuple(zip(branches, probs)))))
        done.add(a.target)

    symbols = frozenset(conv.symbols)
    spec = ProgramSpec(
        init=tuple(init),
        guard=GuardSpec(lhs, tree.guard.cop, rhs, g),
        body_rv=tuple(body_rv),
        body_updates=tuple(updates),
        symbols=symbols,
        assumptions=tuple(assumptions),
    )
    object.__setattr__(spec, "variables", tuple(spec.state_variables()))
    return spec


def _dist(conv: _Converter, target: str, rv: RVExpr) -> DistSpec:
    params = []
    for node in rv.params:
        poly = conv.poly(node)
        if poly.variables():
            raise StructureError(
                target,
                f"parameters of {rv.dist} depend on program variable {sorted(poly.variables())[0]}; "
                "distributions with state-dependent parameters are not supported",
            )
        params.append(poly.constant_value())
    dist = DistSpec(rv.dist, tuple(params))
    _check_dist_params(target, dist)
    return dist


def load(text: str) -> ProgramSpec:
    return validate(parse(text))


def load_file(path) -> ProgramSpec:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read())


def pretty(spec: ProgramSpec) -> str:
    """Render a ProgramSpec as program text that parses back to the same spec."""
    lines = []
    for v, val in spec.init:
        lines.append(f"{v} = {val if isinstance(val, DistSpec) else to_str(val)}")
    g = spec.guard
    lines.append(f"while {g.lhs} {g.cop} {g.rhs}:")
    for v, d in spec.body_rv:
        lines.append(f"    {v} = {d}")
    for v, upd in spec.body_updates:
        if len(upd.branches) == 1:
            lines.append(f"    {v} = {upd.branches[0][0]}")
        else:
            lines.append(f"    {v} = " + "; ".join(f"{poly} @{_prob_str(p)}" for poly, p in upd.branches))
    return "\n".join(lines) + "\n"


def _prob_str(p) -> str:
    s = to_str(p)
    return s if (p.is_Symbol or p.is_Rational) else f"({s})"
