"""Simulation-based soundness check for bounding functions."""

from __future__ import annotations

import numpy as np
import sympy as sp

from probterm.algebra.exppoly import N
from probterm.algebra.symbolic import symbol
from probterm.bounds import BoundStore
from probterm.simulator import SimConfig, sample_paths

BINDINGS = {"c": 1, "e": sp.Rational(1, 10), "x0": 5, "y0": 5, "d": 1}


def bindings_for(prog) -> dict:
    return {s: BINDINGS[s] for s in prog.symbols}


def _as_function(bound, fresh_names, bindings):
    """Vectorized ``(n, magnitudes...) -> value`` for one bounding function."""
    if not bound.is_finite:
        value = np.inf if bound.inf > 0 else -np.inf
        return lambda n, *mags: np.full(np.broadcast(n, *mags).shape, value)
    expr = bound.eventual().to_expr().subs({symbol(k): v for k, v in bindings.items()})
    mags = [symbol(name) for name in fresh_names]
    return sp.lambdify([N] + mags, expr, modules="numpy", dummify=True)


def bound_violations(prog, runs=1000, steps=1000, seed=11, K=10, n_from=50, override=None) -> list:
    """Human-readable descriptions of every bound violated by a simulated run.

    ``override`` replaces selected BoundPairs, which lets tests confirm that
    the check actually detects a wrong bound.
    """
    bindings = bindings_for(prog)
    store = BoundStore(prog)
    bounds = dict(store.all_bounds())
    bounds.update(override or {})
    fresh = dict(store.fresh_symbols)
    state_vars = [v for v in prog.state_variables() if v in bounds]
    paths = sample_paths(prog, SimConfig(bindings, runs, steps, seed), state_vars)
    mags = [np.abs(paths[w][:, 0]) for w in fresh]
    names = list(fresh.values())
    n = np.arange(steps + 1, dtype=float)
    problems = []
    for v in state_vars:
        vals = paths[v][:, n_from:]
        grid = n[n_from:][None, :]
        mag_grids = [m[:, None] for m in mags]
        lo = np.broadcast_to(_as_function(bounds[v].lo, names, bindings)(grid, *mag_grids), vals.shape)
        hi = np.broadcast_to(_as_function(bounds[v].hi, names, bindings)(grid, *mag_grids), vals.shape)
        live = np.isfinite(vals)
        with np.errstate(invalid="ignore", over="ignore"):
            # the constant factor always loosens: K*lo for negative lo, lo/K for positive
            low_bad = live & np.isfinite(lo) & (vals < np.minimum(K * lo, lo / K) - K)
            high_bad = live & np.isfinite(hi) & (vals > np.maximum(K * hi, hi / K) + K)
        if low_bad.any() or high_bad.any():
            problems.append(f"{v}: {int(low_bad.sum())} below {bounds[v].lo}, {int(high_bad.sum())} above {bounds[v].hi}")
    return problems
