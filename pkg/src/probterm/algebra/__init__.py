"""Exact symbolic arithmetic used throughout the analyzer."""

from .exppoly import (
    NEG_INF,
    POS_INF,
    ExpPoly,
    Sign,
    compare_growth,
    dominates,
    eventual_max,
    eventual_min,
    eventual_sign,
    is_bounded,
    leading_term,
    solve_recurrence,
)
from .intervals import Interval, poly_eval_bounds
from .polynomial import UNIT, Monomial, Polynomial, mono_degree, mono_mul, mono_str, monomial
from .symbolic import Trilean, canon, const, sym_sign, symbol

__all__ = [
    "NEG_INF", "POS_INF", "ExpPoly", "Sign", "compare_growth", "dominates", "eventual_max",
    "eventual_min", "eventual_sign", "is_bounded", "leading_term", "solve_recurrence",
    "Interval", "poly_eval_bounds", "UNIT", "Monomial", "Polynomial", "mono_degree",
    "mono_mul", "mono_str", "monomial", "Trilean", "canon", "const", "sym_sign", "symbol",
]
