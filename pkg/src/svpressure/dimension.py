"""Bowen-equation roots and certified dimension brackets.

A root is only as good as the estimator behind it, so every bisection runs
against a single estimator at a single level.  An upper-bound pressure
function has its root at or above the true root; a lower-bound one at or
below.  Brackets take the tightest root on each side across the schedule.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DepthBudget,
    EmptySubset,
    InvariantViolation,
    NotContracting,
    NotExpanding,
)
from .matrixpot import Kind, PotentialSpec, bottom
from .pressure import (
    CocycleSystem,
    Direction,
    PressureEstimate,
    Schedule,
    _Frontier,
    _expand,
    _finish,
    _seed,
    block_pressure,
    cylinder_sum,
    exact_lyapunov_available,
    free_energy_estimate,
    lyapunov_spectrum,
    one_step_gibbs,
    super_power_lower,
)

ROOT_TOL = 1e-10
ROOT_MAX_ITER = 200
COVER_MAX_DEPTH = 20
# MC budget per evaluation inside a root search; only used when the
# spectrum is not exact, where the result is heuristic anyway
HEURISTIC_TRIALS = 64
HEURISTIC_HORIZON = 2000
COVER_MAX_WORDS = 20_000_000


class Target(enum.Enum):
    HAUSDORFF_REPELLER = "hausdorff_repeller"
    BOX_REPELLER = "box_repeller"
    AFFINITY_IFS = "affinity_ifs"
    CARATHEODORY = "caratheodory"


@dataclass
class Root:
    value: float
    flag: str | None = None
    iterations: int = 0

    def __float__(self) -> float:
        return self.value


@dataclass
class RootRecord:
    estimator: str
    spec: str
    level: int
    direction: Direction
    root: float
    flag: str | None


@dataclass
class DimensionBracket:
    lower: float
    upper: float
    lower_provenance: str
    upper_provenance: str
    target: Target
    flags: list[str] = field(default_factory=list)
    trace: list[RootRecord] = field(default_factory=list)

    def to_json(self, trace_csv_path: str | None = None) -> dict:
        return {
            "target": self.target.value,
            "lower": self.lower,
            "upper": self.upper,
            "lower_provenance": self.lower_provenance,
            "upper_provenance": self.upper_provenance,
            "flags": list(self.flags),
            "trace_csv_path": trace_csv_path,
        }


class PressureFunctionHandle:
    """``s -> PressureEstimate`` at one estimator, level and direction.

    Evaluations are cached per ``s``.
    """

    def __init__(self, fn: Callable[[float], PressureEstimate], d: int, direction: Direction,
                 level: int, estimator: str, spec_label: str = ""):
        self.fn = fn
        self.d = d
        self.direction = direction
        self.level = level
        self.estimator = estimator
        self.spec_label = spec_label
        self._cache: dict[float, PressureEstimate] = {}

    def __call__(self, s: float) -> PressureEstimate:
        s = float(s)
        e = self._cache.get(s)
        if e is None:
            e = self.fn(s)
            if e.direction != self.direction:
                raise InvariantViolation(
                    f"{self.estimator} returned {e.direction} but the handle is {self.direction}"
                )
            self._cache[s] = e
        return e

    def value(self, s: float) -> float:
        return float(self(s).value)

    def is_decreasing(self, grid: Sequence[float]) -> bool:
        vals = [self.value(s) for s in grid]
        return all(b < a for a, b in zip(vals, vals[1:]))


def estimator_handle(system: CocycleSystem, spec: PotentialSpec, estimator: str, level: int,
                     workers: int | None = None) -> PressureFunctionHandle:
    fns = {
        "cylinder_sum": lambda s: cylinder_sum(system, spec.with_s(s), level, workers),
        "block_pressure": lambda s: block_pressure(system, spec.with_s(s), level, workers),
        "super_power_lower": lambda s: super_power_lower(system, spec.with_s(s), level, workers),
    }
    if estimator == "free_energy":
        def fe(s):
            sp_ = spec.with_s(s)
            mu = system.cached(("gibbs1", sp_), lambda: one_step_gibbs(system, sp_))
            lyap = lyapunov_spectrum(system, mu, HEURISTIC_TRIALS, HEURISTIC_HORIZON)
            return free_energy_estimate(system, mu, sp_, lyap)
        fn = fe
    else:
        fn = fns[estimator]
    direction = fn(0.0).direction
    return PressureFunctionHandle(fn, system.d, direction, level, estimator, spec.label)


def bowen_root(handle: Callable[[float], object], tol: float = ROOT_TOL, d: float | None = None) -> Root:
    """Bisection for the zero of a decreasing pressure function on ``[0, d]``.

    ``handle(0) <= 0`` gives 0 flagged ``saturated_at_0`` (not bracketed);
    ``handle(d) >= 0`` gives ``d`` flagged ``saturated_at_d``.
    """
    if d is None:
        d = getattr(handle, "d", None)
        if d is None:
            raise ConfigError("bowen_root needs the dimension d")

    seen: dict[float, float] = {}

    def f(s):
        v = handle(s)
        seen[s] = float(v.value if isinstance(v, PressureEstimate) else v)
        return seen[s]

    if f(0.0) <= 0:
        return Root(0.0, "saturated_at_0")
    if f(float(d)) >= 0:
        return Root(float(d), "saturated_at_d")
    lo, hi = 0.0, float(d)
    it = 0
    while hi - lo >= tol and it < ROOT_MAX_ITER:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        it += 1
    vals = [seen[s] for s in sorted(seen)]
    # the bracketing argument only needs the sign change, but a handle that
    # increases somewhere is worth surfacing
    flag = None if all(b <= a + 1e-12 for a, b in zip(vals, vals[1:])) else "not_decreasing"
    return Root(0.5 * (lo + hi), flag, it)


def moran_root(ratios: Sequence[float]) -> float:
    """Solve ``sum r_i^s = 1``; ratios above 1 are read as reciprocals."""
    r = np.asarray(list(ratios), dtype=float)
    if r.size == 0:
        raise ConfigError("moran_root needs at least one ratio")
    if np.any(r <= 0) or np.any(r == 1):
        raise ConfigError("ratios must be positive and different from 1")
    r = np.where(r > 1, 1.0 / r, r)
    g = lambda s: float(np.sum(r**s)) - 1.0
    if g(0.0) <= 0:
        return 0.0
    hi = 1.0
    while g(hi) > 0:
        hi *= 2
    lo = 0.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _roots(system: CocycleSystem, spec: PotentialSpec, estimators: Sequence[tuple[str, int]],
           workers: int | None) -> list[RootRecord]:
    out = []
    for name, level in estimators:
        h = estimator_handle(system, spec, name, level, workers)
        r = bowen_root(h)
        out.append(RootRecord(name, spec.label, level, h.direction, r.value, r.flag))
    return out


def _pick(records: Sequence[RootRecord], direction: Direction):
    cands = [r for r in records if r.direction == direction]
    if not cands:
        return None
    if direction == Direction.UPPER_BOUND:
        return min(cands, key=lambda r: r.root)
    return max(cands, key=lambda r: r.root)


def _prov(r: RootRecord | None) -> str:
    return "none" if r is None else f"{r.estimator}[{r.spec}]@{r.level}"


def _finalize(lower: RootRecord | None, upper: RootRecord | None, d: int, target: Target,
              trace: list[RootRecord], flags: list[str]) -> DimensionBracket:
    lo = 0.0 if lower is None else lower.root
    up = float(d) if upper is None else upper.root
    for r in (lower, upper):
        if r is not None and r.flag:
            flags.append(f"{r.direction.value}:{r.flag}")
    if lo > up + 1e-9 or not (0.0 <= lo <= d and 0.0 <= up <= d):
        raise InvariantViolation(f"inconsistent bracket [{lo}, {up}]")
    # roots agree to the bisection tolerance; keep the pair ordered
    lo = min(lo, up)
    return DimensionBracket(lo, up, _prov(lower), _prov(upper), target, flags, trace)


def _upper_estimators(schedule: Schedule) -> list[tuple[str, int]]:
    return [(e, n) for n in schedule.levels for e in ("cylinder_sum", "block_pressure")
            if e in schedule.estimators]


def _sub_upper_roots(system: CocycleSystem, schedule: Schedule, workers) -> list[RootRecord]:
    recs = _roots(system, bottom(0.0, -1), _upper_estimators(schedule), workers)
    return [r for r in recs if r.direction == Direction.UPPER_BOUND]


def repeller_bracket(system: CocycleSystem, schedule: Schedule = Schedule(),
                     workers: int | None = None) -> DimensionBracket:
    """``[root of a lower bound for P_sup, root of an upper bound for P_sub]``.

    The upper side bounds the Hausdorff dimension from above; the lower side
    comes from super-additive estimates of ``-psi^s`` and bounds it from below.
    The one-step potential (power level 0) is always part of the trace.
    """
    if not system.cocycle.expanding:
        raise NotExpanding("repeller_bracket needs an expanding derivative cocycle")
    trace = _sub_upper_roots(system, schedule, workers)
    sup = PotentialSpec(Kind.TOP, 0.0, -1)
    lower_est = [("super_power_lower", k) for k in sorted(set(schedule.power_levels) | {0})]
    lower_est += [("block_pressure", n) for n in schedule.levels if "block_pressure" in schedule.estimators]
    if system.sft.is_full and "cylinder_sum" in schedule.estimators:
        lower_est += [("cylinder_sum", n) for n in schedule.levels]
    trace += [r for r in _roots(system, sup, lower_est, workers) if r.direction == Direction.LOWER_BOUND]
    return _finalize(_pick(trace, Direction.LOWER_BOUND), _pick(trace, Direction.UPPER_BOUND),
                     system.d, Target.HAUSDORFF_REPELLER, trace, [])


def caratheodory_dimension(system: CocycleSystem, schedule: Schedule = Schedule(),
                           workers: int | None = None) -> float:
    """Bowen root of the sub-additive pressure of ``-phi^t``; the same
    machinery and the same number as the upper end of
    :func:`repeller_bracket`."""
    if not system.cocycle.expanding:
        raise NotExpanding("caratheodory_dimension needs an expanding derivative cocycle")
    best = _pick(_sub_upper_roots(system, schedule, workers), Direction.UPPER_BOUND)
    return float(system.d) if best is None else best.root


def caratheodory_bracket(system: CocycleSystem, schedule: Schedule = Schedule(),
                         workers: int | None = None) -> DimensionBracket:
    trace = _sub_upper_roots(system, schedule, workers)
    best = _pick(trace, Direction.UPPER_BOUND)
    return _finalize(best, best, system.d, Target.CARATHEODORY, trace, [])


def affinity_dimension(system: CocycleSystem, schedule: Schedule = Schedule(),
                       workers: int | None = None) -> DimensionBracket:
    """Bracket for the zero of ``s -> P(A, s)`` with the sub-additive
    potential ``+psi^s`` of a contracting cocycle.

    Upper roots come from cylinder sums and block pressures.  Lower roots come
    from the free energy of the one-step equilibrium measure, which is
    certified when the Lyapunov spectrum is exact (diagonal or conformal
    generators); otherwise the lower endpoint is flagged heuristic.
    """
    if not system.cocycle.contracting:
        raise NotContracting("affinity_dimension needs all singular values < 1")
    spec = PotentialSpec(Kind.TOP, 0.0, 1)
    trace = _roots(system, spec, _upper_estimators(schedule), workers)
    flags: list[str] = []
    if "free_energy" in schedule.estimators and system.sft.irreducible:
        if exact_lyapunov_available(system):
            trace += _roots(system, spec, [("free_energy", 0)], workers)
        else:
            flags.append("lower_heuristic")
            trace += _roots(system, spec, [("free_energy", 0)], workers)
    upper = _pick(trace, Direction.UPPER_BOUND)
    lower = _pick(trace, Direction.LOWER_BOUND)
    if lower is None:
        heur = _pick([RootRecord(r.estimator, r.spec, r.level, Direction.LOWER_BOUND, r.root, r.flag)
                      for r in trace if r.direction == Direction.HEURISTIC], Direction.LOWER_BOUND)
        if heur is not None and upper is not None:
            heur.root = min(heur.root, upper.root)
        lower = heur
    return _finalize(lower, upper, system.d, Target.AFFINITY_IFS, trace, flags)


# ----------------------------------------------------------------------------
# Caratheodory cover measure
# ----------------------------------------------------------------------------

def caratheodory_cover_measure(system: CocycleSystem, alpha: float, max_depth: int,
                               forbidden: Sequence[Sequence[int]] = (),
                               min_depth: int | None = None) -> float:
    """Finite-depth estimate of the singular Caratheodory cover measure.

    Minimizes ``sum_i exp(-phi^alpha(A_{w_i}))`` over covers of the sub-shift
    (``system.sft`` with ``forbidden`` words removed) by cylinders whose
    lengths lie in ``[min_depth, max_depth]``; each cylinder is either used
    whole or split into its children.  ``min_depth`` defaults to
    ``ceil(max_depth / 2)``.
    """
    if not 1 <= max_depth <= COVER_MAX_DEPTH:
        raise DepthBudget(f"max_depth must be in 1..{COVER_MAX_DEPTH}")
    if min_depth is None:
        min_depth = (max_depth + 1) // 2
    if not 1 <= min_depth <= max_depth:
        raise ConfigError("need 1 <= min_depth <= max_depth")
    forb = [np.asarray(f, dtype=np.int64) for f in forbidden]
    spec = bottom(alpha, 1)
    D = system.sft.dense.astype(bool)
    ldet_gen = np.log(np.abs(np.linalg.det(system.cocycle.mats)))

    def keep(words: np.ndarray) -> np.ndarray:
        ok = np.ones(words.shape[0], dtype=bool)
        j = words.shape[1]
        for f in forb:
            if f.size <= j:
                ok &= ~np.all(words[:, j - f.size:] == f, axis=1)
        return ok

    fr = _seed(system, range(system.k), False)
    words = np.arange(system.k, dtype=np.int64)[:, None]
    m = keep(words)
    fr, words = _sub(fr, m), words[m]
    parents: list[np.ndarray] = []
    logw: list[np.ndarray] = []
    for depth in range(1, max_depth + 1):
        if depth > 1:
            parent, b = np.nonzero(D[fr.last])
            if parent.size > COVER_MAX_WORDS:
                raise DepthBudget(f"more than {COVER_MAX_WORDS} cylinders at depth {depth}")
            words = np.concatenate([words[parent], b[:, None]], axis=1)
            fr = _expand(system, fr, D, ldet_gen)
            m = keep(words)
            fr, words, parent = _sub(fr, m), words[m], parent[m]
            parents.append(parent)
        data = _finish(system, fr, depth)
        logw.append(-data.potential(spec))
    # prune cylinders that die before max_depth (they carry no points)
    val = logw[-1]
    for depth in range(max_depth - 1, 0, -1):
        parent = parents[depth - 1]
        n_par = logw[depth - 1].shape[0]
        child = _group_logsumexp(parent, val, n_par)
        if depth >= min_depth:
            val = np.where(np.isfinite(child), np.minimum(logw[depth - 1], child), -np.inf)
        else:
            val = child
    alive = val[np.isfinite(val)]
    if alive.size == 0:
        raise EmptySubset("the forbidden words leave no infinite sequences up to max_depth")
    mx = float(alive.max())
    return math.exp(mx + math.log(float(np.sum(np.exp(alive - mx)))))


def _group_logsumexp(group: np.ndarray, val: np.ndarray, n: int) -> np.ndarray:
    mx = np.full(n, -np.inf)
    np.maximum.at(mx, group, val)
    ok = np.isfinite(val)
    tot = np.zeros(n)
    np.add.at(tot, group[ok], np.exp(val[ok] - mx[group[ok]]))
    with np.errstate(divide="ignore"):
        return np.where(tot > 0, mx + np.log(tot), -np.inf)


def _sub(fr: _Frontier, mask: np.ndarray) -> _Frontier:
    idx = np.flatnonzero(mask)
    return _Frontier(fr.first[idx], fr.last[idx], None, fr.P[idx], fr.ls[idx], fr.ldet[idx])


# ----------------------------------------------------------------------------
# box counting oracle
# ----------------------------------------------------------------------------

@dataclass
class BoxEstimate:
    slope: float
    intercept: float
    residual: float
    depths: list[int]
    counts: list[int]


def box_counting_oracle(model, depths: Sequence[int]) -> BoxEstimate:
    """Least-squares slope of ``log N(2^-n)`` against ``n log 2``."""
    depths = list(depths)
    if len(depths) < 3:
        raise ConfigError("box counting needs at least three depths")
    counts = [int(model.realizer.box_count(n)) for n in depths]
    x = np.array(depths, dtype=float) * math.log(2.0)
    y = np.log(np.array(counts, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return BoxEstimate(float(slope), float(intercept), resid, depths, counts)
