"""Raw moments and supports of the built-in distributions.

Parameter conventions::

    uniform(a, b)            continuous on [a, b]
    gauss(mu, var)           mean and *variance*
    laplace(mu, b)           location and scale
    bernoulli(p)
    binomial(n, p)
    geometric(p)             failures before the first success, support {0, 1, ...}
    hypergeometric(N, K, n)  population, successes in population, draws
    exponential(lam)         rate
    beta(alpha, beta)
    chi-squared(k)           degrees of freedom
    rayleigh(sigma)          scale
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import sympy as sp

from .algebra.symbolic import ONE, ZERO, canon, sign_of, to_str

ARITY = {
    "uniform": 2,
    "gauss": 2,
    "laplace": 2,
    "bernoulli": 1,
    "binomial": 2,
    "geometric": 1,
    "hypergeometric": 3,
    "exponential": 1,
    "beta": 2,
    "chi-squared": 1,
    "rayleigh": 1,
}

DEFAULT_MAX_MOMENT = 8


@dataclass(frozen=True)
class DistSpec:
    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown distribution {self.kind!r}")
        if len(self.params) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {ARITY[self.kind]} parameters, got {len(self.params)}")
        object.__setattr__(self, "params", tuple(canon(p) for p in self.params))

    def __str__(self):
        return f"RV({self.kind}, " + ", ".join(to_str(p) for p in self.params) + ")"

    def symbols(self) -> set[str]:
        return {s.name for p in self.params for s in p.free_symbols}


@dataclass(frozen=True)
class SupportInterval:
    """Closed support hull; ``None`` stands for the matching infinity."""

    lo: object
    hi: object

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None


def _stirling2(k: int, j: int) -> int:
    return int(sp.functions.combinatorial.numbers.stirling(k, j))


def _falling(x, j: int):
    out = ONE
    for i in range(j):
        out *= x - i
    return out


def _double_factorial_odd(j: int) -> int:
    out = 1
    for i in range(j - 1, 0, -2):
        out *= i
    return out


def raw_moment(d: DistSpec, k: int, max_order: int = DEFAULT_MAX_MOMENT):
    """Exact ``E[X**k]`` as a canonical constant, or None when unavailable."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if k == 0:
        return ONE
    if k > max_order:
        return None
    p = d.params
    kind = d.kind
    if kind == "uniform":
        a, b = p
        # (b^{k+1} - a^{k+1}) / ((k+1)(b-a)) without the division by b - a
        value = sp.Add(*[a ** i * b ** (k - i) for i in range(k + 1)]) / (k + 1)
    elif kind == "gauss":
        mu, var = p
        value = sp.Add(*[
            comb(k, j) * mu ** (k - j) * var ** (j // 2) * _double_factorial_odd(j)
            for j in range(0, k + 1, 2)
        ])
    elif kind == "laplace":
        mu, b = p
        value = sp.Add(*[comb(k, j) * mu ** (k - j) * factorial(j) * b ** j for j in range(0, k + 1, 2)])
    elif kind == "bernoulli":
        value = p[0]
    elif kind == "binomial":
        n, q = p
        value = sp.Add(*[_stirling2(k, j) * _falling(n, j) * q ** j for j in range(1, k + 1)])
    elif kind == "geometric":
        (q,) = p
        ratio = (1 - q) / q
        value = sp.Add(*[_stirling2(k, j) * factorial(j) * ratio ** j for j in range(1, k + 1)])
    elif kind == "hypergeometric":
        big_n, big_k, n = p
        mean = n * big_k / big_n
        if k == 1:
            value = mean
        elif k == 2:
            var = n * (big_k / big_n) * ((big_n - big_k) / big_n) * ((big_n - n) / (big_n - 1))
            value = var + mean ** 2
        else:
            return None
    elif kind == "exponential":
        (lam,) = p
        value = sp.Integer(factorial(k)) / lam ** k
    elif kind == "beta":
        alpha, beta = p
        value = sp.Mul(*[(alpha + r) / (alpha + beta + r) for r in range(k)])
    elif kind == "chi-squared":
        (dof,) = p
        value = sp.Mul(*[dof + 2 * r for r in range(k)])
    elif kind == "rayleigh":
        (sigma,) = p
        value = sigma ** k * 2 ** sp.Rational(k, 2) * sp.gamma(1 + sp.Rational(k, 2))
    else:  # pragma: no cover - guarded by DistSpec
        raise ValueError(kind)
    return canon(value)


def _min_const(a, b):
    s = sign_of(a - b)
    if s is None:
        return None
    return a if s <= 0 else b


def _max_const(a, b):
    s = sign_of(a - b)
    if s is None:
        return None
    return a if s >= 0 else b


def support(d: DistSpec) -> SupportInterval:
    p = d.params
    kind = d.kind
    if kind == "uniform":
        return SupportInterval(p[0], p[1])
    if kind in ("bernoulli", "beta"):
        return SupportInterval(ZERO, ONE)
    if kind == "binomial":
        return SupportInterval(ZERO, p[0])
    if kind in ("gauss", "laplace"):
        return SupportInterval(None, None)
    if kind in ("exponential", "chi-squared", "rayleigh", "geometric"):
        return SupportInterval(ZERO, None)
    if kind == "hypergeometric":
        big_n, big_k, n = p
        lo = _max_const(ZERO, canon(n + big_k - big_n))
        hi = _min_const(n, big_k)
        # incomparable symbolic endpoints fall back to the looser of the two
        return SupportInterval(ZERO if lo is None else lo, n if hi is None else hi)
    raise ValueError(kind)  # pragma: no cover
