"""Monte Carlo execution of programs with concrete constants.

Randomness is counter based: the uniform variate used by trial ``t`` at loop
iteration ``k`` for statement slot ``s`` is a hash of ``(seed, t, k, s)``.
Initialization uses iteration 0.  Results therefore do not depend on how
trials are batched or ordered, and a fixed seed reproduces a report exactly.

Trials are advanced together as numpy arrays; every sample is drawn by
inverse-CDF transform of its uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special, stats

from .algebra.polynomial import Polynomial
from .algebra.symbolic import evaluate
from .distributions import DistSpec
from .errors import UnboundSymbol
from .frontend import ProgramSpec

_GOLDEN = 0x9E3779B97F4A7C15
_STEP_MUL = 0xD1B54A32D192ED03
_SLOT_MUL = 0xABC98388FB8FAC03
_UNIFORM_BUDGET = 1 << 20  # uniforms generated per block


@dataclass(frozen=True)
class SimConfig:
    bindings: dict
    runs: int
    max_steps: int
    seed: int = 0

    def __post_init__(self):
        if self.runs <= 0:
            raise ValueError("runs must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        clean = {}
        for name, value in self.bindings.items():
            value = Fraction(value)
            if value <= 0:
                raise ValueError(f"symbol {name} must be bound to a positive value, got {value}")
            clean[name] = value
        object.__setattr__(self, "bindings", clean)
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)


@dataclass
class SimReport:
    runs: int
    terminated: int
    censored: int
    overflowed: int
    total_steps_terminated: int
    histogram: list = field(default_factory=list)  # (lo, hi, count), log2 buckets

    @property
    def termination_rate(self) -> Fraction:
        return Fraction(self.terminated, self.runs)

    @property
    def rate_stderr(self) -> float:
        r = self.terminated / self.runs
        return math.sqrt(r * (1 - r) / self.runs)

    @property
    def mean_steps_terminated(self) -> Fraction | None:
        if not self.terminated:
            return None
        return Fraction(self.total_steps_terminated, self.terminated)

    def to_dict(self) -> dict:
        mean = self.mean_steps_terminated
        return {
            "runs": self.runs,
            "terminated": self.terminated,
            "censored": self.censored,
            "overflowed": self.overflowed,
            "termination_rate": str(self.termination_rate),
            "termination_rate_float": float(self.termination_rate),
            "rate_stderr": self.rate_stderr,
            "total_steps_terminated": self.total_steps_terminated,
            "mean_steps_terminated": None if mean is None else str(mean),
            "histogram": [list(b) for b in self.histogram],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimReport":
        return cls(d["runs"], d["terminated"], d["censored"], d["overflowed"],
                   d["total_steps_terminated"], [tuple(b) for b in d["histogram"]])


# --- counter-based uniforms ----------------------------------------------------------

def _mix(z):
    """splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def trial_keys(seed: int, trials) -> np.ndarray:
    trials = np.asarray(trials, dtype=np.uint64)
    with np.errstate(over="ignore"):
        s = _mix(np.array([seed], dtype=np.uint64) ^ np.uint64(_GOLDEN))
        return _mix(s ^ (trials * np.uint64(_GOLDEN)))


def uniforms(keys: np.ndarray, steps, slots) -> np.ndarray:
    """Uniforms in (0, 1) with shape ``(len(slots), len(steps), len(keys))``."""
    steps = np.asarray(steps, dtype=np.uint64)
    slots = np.asarray(slots, dtype=np.uint64)
    with np.errstate(over="ignore"):
        sk = _mix(steps[None, :] * np.uint64(_STEP_MUL) + slots[:, None] * np.uint64(_SLOT_MUL) + np.uint64(1))
        z = _mix(keys[None, None, :] ^ sk[:, :, None])
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


# --- samplers -------------------------------------------------------------------------

def sample(d: DistSpec, u: np.ndarray, bindings) -> np.ndarray:
    """Inverse-CDF transform of uniforms ``u`` into draws from ``d``."""
    p = [evaluate(x, bindings) for x in d.params]
    k = d.kind
    if k == "uniform":
        return p[0] + (p[1] - p[0]) * u
    if k == "gauss":
        return p[0] + math.sqrt(p[1]) * special.ndtri(u)
    if k == "laplace":
        c = u - 0.5
        return p[0] - p[1] * np.sign(c) * np.log1p(-2.0 * np.abs(c))
    if k == "bernoulli":
        return (u < p[0]).astype(np.float64)
    if k == "binomial":
        return stats.binom.ppf(u, int(round(p[0])), p[1])
    if k == "geometric":
        if p[0] >= 1:
            return np.zeros_like(u)
        return np.floor(np.log1p(-u) / math.log1p(-p[0]))
    if k == "hypergeometric":
        return stats.hypergeom.ppf(u, int(round(p[0])), int(round(p[1])), int(round(p[2])))
    if k == "exponential":
        return -np.log1p(-u) / p[0]
    if k == "beta":
        return special.betaincinv(p[0], p[1], u)
    if k == "chi-squared":
        return 2.0 * special.gammaincinv(p[0] / 2.0, u)
    if k == "rayleigh":
        return p[0] * np.sqrt(-2.0 * np.log1p(-u))
    raise ValueError(k)  # pragma: no cover


# --- compilation ----------------------------------------------------------------------

class _CompiledPoly:
    def __init__(self, poly: Polynomial, bindings):
        self.constant = 0.0
        self.terms = []
        for m, c in poly.items():
            if m:
                self.terms.append((evaluate(c, bindings), m))
            else:
                self.constant = evaluate(c, bindings)

    def __call__(self, state: dict, size: int) -> np.ndarray:
        out = None
        for c, m in self.terms:
            t = None
            for v, e in m:
                f = state[v] if e == 1 else state[v] ** e
                t = f if t is None else t * f
            if c != 1.0:
                t = c * t
            out = t if out is None else out + t
        if out is None:
            return np.full(size, self.constant)
        return out + self.constant if self.constant else out


class _Program:
    def __init__(self, prog: ProgramSpec, bindings):
        missing = sorted(set(prog.symbols) - set(bindings))
        if missing:
            raise UnboundSymbol(missing)
        self.bindings = bindings
        self.init = []
        for var, v0 in prog.init:
            if isinstance(v0, DistSpec):
                self.init.append((var, v0, None))
            else:
                self.init.append((var, None, evaluate(v0, bindings)))
        self.body = []
        for var, stmt in prog.statements():
            if isinstance(stmt, DistSpec):
                self.body.append((var, stmt, None, None))
            else:
                polys = [_CompiledPoly(poly, bindings) for poly, _ in stmt.branches]
                cum = np.cumsum([evaluate(pr, bindings) for _, pr in stmt.branches])[:-1]
                self.body.append((var, None, polys, cum))
        self.guard = _CompiledPoly(prog.guard.poly, bindings)
        self.variables = list(dict.fromkeys([v for v, *_ in self.init] + [v for v, *_ in self.body]))
        self.slots = max(len(self.init), len(self.body), 1)

    def initial_state(self, keys) -> dict:
        n = len(keys)
        u = uniforms(keys, [0], range(self.slots))
        state = {v: np.zeros(n) for v in self.variables}
        for slot, (var, dist, value) in enumerate(self.init):
            state[var] = sample(dist, u[slot, 0], self.bindings) if dist is not None else np.full(n, value)
        return state

    def step(self, state: dict, u: np.ndarray, size: int):
        """One loop iteration in place; ``u`` has one row of uniforms per slot."""
        for slot, (var, dist, polys, cum) in enumerate(self.body):
            if dist is not None:
                state[var] = sample(dist, u[slot], self.bindings)
            elif len(polys) == 1:
                state[var] = polys[0](state, size)
            elif len(polys) == 2:
                state[var] = np.where(u[slot] < cum[0], polys[0](state, size), polys[1](state, size))
            else:
                choice = np.searchsorted(cum, u[slot], side="right")
                state[var] = np.choose(choice, [f(state, size) for f in polys])


def _take(state: dict, idx) -> dict:
    return {v: a[idx] for v, a in state.items()}


def _run(prog: ProgramSpec, cfg: SimConfig, recorder=None):
    """Core loop; returns per-trial (steps, status) with status 0 done, 1 censored, 2 overflow.

    A trial overflows when its guard value stops being finite, or when it is
    censored with a non-finite variable.  Variables that never reach the guard
    may overflow harmlessly in trials that do terminate.
    """
    compiled = _Program(prog, cfg.bindings)
    ids = np.arange(cfg.runs, dtype=np.int64)
    keys = trial_keys(cfg.seed, ids)
    steps_taken = np.full(cfg.runs, cfg.max_steps, dtype=np.int64)
    status = np.ones(cfg.runs, dtype=np.int8)
    with np.errstate(all="ignore"):
        state = compiled.initial_state(keys)
        if recorder is not None:
            recorder(0, ids, state)
        g = compiled.guard(state, len(ids))
        bad = ~np.isfinite(g) | ~_all_finite(compiled, state)
        alive = (g > 0) & ~bad
        _close(ids, ~alive, bad, np.zeros(len(ids), dtype=np.int64), steps_taken, status)
        ids, keys, state = ids[alive], keys[alive], _take(state, alive)
        k = 0
        while k < cfg.max_steps and len(ids):
            n = len(ids)
            block = max(1, min(cfg.max_steps - k, _UNIFORM_BUDGET // (n * compiled.slots)))
            u = uniforms(keys, np.arange(k + 1, k + block + 1), range(compiled.slots))
            alive = np.ones(n, dtype=bool)
            bad = np.zeros(n, dtype=bool)
            survived = np.zeros(n, dtype=np.int64)
            for j in range(block):
                compiled.step(state, u[:, j, :], n)
                if recorder is not None:
                    recorder(k + j + 1, ids[alive], _take(state, alive))
                g = compiled.guard(state, n)
                bad |= alive & ~np.isfinite(g)
                alive &= g > 0
                survived += alive
                if j % 64 == 63 and not alive.any():
                    break
            k += block
            alive &= ~bad
            _close(ids, ~alive, bad, k - block + 1 + survived, steps_taken, status)
            ids, keys, state = ids[alive], keys[alive], _take(state, alive)
        if len(ids):
            status[ids[~_all_finite(compiled, state)]] = 2
    return steps_taken, status


def _all_finite(compiled, state) -> np.ndarray:
    ok = None
    for v in compiled.variables:
        f = np.isfinite(state[v])
        ok = f if ok is None else ok & f
    return ok


def _close(ids, stopped, bad, stop_step, steps_taken, status):
    done = stopped & ~bad
    steps_taken[ids[done]] = stop_step[done]
    status[ids[done]] = 0
    status[ids[stopped & bad]] = 2


def _histogram(steps: np.ndarray) -> list:
    if not len(steps):
        return []
    buckets = np.where(steps == 0, 0, np.floor(np.log2(np.maximum(steps, 1))).astype(np.int64) + 1)
    out = []
    for b in np.unique(buckets):
        lo = 0 if b == 0 else 1 << (int(b) - 1)
        hi = 0 if b == 0 else (1 << int(b)) - 1
        out.append((lo, hi, int((buckets == b).sum())))
    return out


def simulate(prog: ProgramSpec, cfg: SimConfig) -> SimReport:
    steps, status = _run(prog, cfg)
    done = status == 0
    return SimReport(
        runs=cfg.runs,
        terminated=int(done.sum()),
        censored=int((status == 1).sum()),
        overflowed=int((status == 2).sum()),
        total_steps_terminated=int(steps[done].sum()),
        histogram=_histogram(steps[done]),
    )


def sample_paths(prog: ProgramSpec, cfg: SimConfig, variables=None) -> dict:
    """Trajectories ``var -> array (runs, max_steps + 1)``; NaN once a trial stops."""
    variables = list(variables or prog.state_variables())
    paths = {v: np.full((cfg.runs, cfg.max_steps + 1), np.nan) for v in variables}

    def record(k, ids, state):
        for v in variables:
            paths[v][ids, k] = state[v]

    _run(prog, cfg, record)
    return paths
