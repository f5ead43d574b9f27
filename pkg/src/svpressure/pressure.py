"""Estimators for sub-additive and super-additive pressure of singular-value
potentials over SFT-coded matrix cocycles.

Every estimate carries a certification direction.  The table is fixed:

==========================  ==============  =====================================
estimator                   sub-additive    super-additive
==========================  ==============  =====================================
cylinder_sum                UPPER_BOUND     LOWER_BOUND on full shifts, else
                                            HEURISTIC
block_pressure              UPPER_BOUND     LOWER_BOUND
super_power_lower           (rejected)      LOWER_BOUND
free_energy                 LOWER_BOUND if the Lyapunov spectrum is exact,
                            HEURISTIC otherwise
==========================  ==============  =====================================
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    BudgetExceeded,
    ConfigError,
    IncompatibleMeasure,
    SpecNotSuperAdditive,
    StateBudgetExceeded,
)
from .matrixpot import (
    Kind,
    MatrixCocycle,
    PotentialSpec,
    block_log_extremes,
    bottom_from_log_sv,
    multiply_normalized,
    singular_values_batch,
    tilde_bottom_from_blocks,
    tilde_top_from_blocks,
    top_from_log_sv,
)
from .symbolic import (
    STATE_BUDGET,
    MarkovMeasure,
    Sft,
    check_compatible,
    markov_entropy,
    spectral_radius,
)

NODE_BUDGET = 100_000_000
CHUNK = 1 << 16
CACHE_WORDS = 1 << 21
DEFAULT_TRIALS = 1000
DEFAULT_HORIZON = 10_000


class Direction(enum.Enum):
    UPPER_BOUND = "upper"
    LOWER_BOUND = "lower"
    HEURISTIC = "heuristic"


@dataclass
class PressureEstimate:
    value: float
    direction: Direction
    level: int
    estimator: str
    spec: PotentialSpec | None = None
    wall_time_ms: float = 0.0

    @property
    def s(self) -> float | None:
        return None if self.spec is None else self.spec.s


@dataclass
class LyapunovSpectrum:
    lambdas: np.ndarray
    stderr: np.ndarray
    # per-coordinate exponents (diagonal cocycles only), in coordinate order
    coordinate: np.ndarray | None = None

    @property
    def exact(self) -> bool:
        return bool(np.all(self.stderr == 0))


@dataclass(eq=False)
class CocycleSystem:
    sft: Sft
    cocycle: MatrixCocycle
    name: str = ""
    origin: str = ""
    metadata: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.cocycle.k != self.sft.k:
            raise ConfigError(
                f"cocycle has {self.cocycle.k} matrices but the SFT has {self.sft.k} symbols"
            )

    @property
    def d(self) -> int:
        return self.cocycle.d

    @property
    def k(self) -> int:
        return self.sft.k

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.sft.dense.tobytes())
        h.update(np.ascontiguousarray(self.cocycle.mats).tobytes())
        h.update(self.cocycle.orientation.value.encode())
        return h.hexdigest()[:16]

    def cached(self, key, build):
        # concurrent readers, single writer per key
        val = self._cache.get(key)
        if val is not None:
            return val
        with self._lock:
            val = self._cache.get(key)
            if val is None:
                val = build()
                self._cache[key] = val
        return val

    def scaled(self, c: float) -> "CocycleSystem":
        return CocycleSystem(self.sft, self.cocycle.scaled(c), self.name, self.origin, dict(self.metadata))


# ----------------------------------------------------------------------------
# word tree walk
# ----------------------------------------------------------------------------

@dataclass
class _Frontier:
    first: np.ndarray
    last: np.ndarray
    codes: np.ndarray | None
    P: np.ndarray
    ls: np.ndarray
    ldet: np.ndarray

    def __len__(self):
        return self.first.shape[0]

    def slice(self, i, j) -> "_Frontier":
        return _Frontier(
            self.first[i:j], self.last[i:j],
            None if self.codes is None else self.codes[i:j],
            self.P[i:j], self.ls[i:j], self.ldet[i:j],
        )


@dataclass
class LevelData:
    """Per-word data for all admissible words of one length, lexicographic."""

    n: int
    first: np.ndarray
    last: np.ndarray
    codes: np.ndarray | None
    log_sv: np.ndarray
    block_hi: np.ndarray | None = None
    block_lo: np.ndarray | None = None

    def __len__(self):
        return self.first.shape[0]

    def potential(self, spec: PotentialSpec, blocks=None) -> np.ndarray:
        if spec.kind == Kind.TOP:
            v = top_from_log_sv(self.log_sv, spec.s)
        elif spec.kind == Kind.BOTTOM:
            v = bottom_from_log_sv(self.log_sv, spec.s)
        elif spec.kind == Kind.SCALAR:
            v = spec.s * self.log_sv[:, 0]
        else:
            if self.block_hi is None:
                raise ConfigError("TILDE potentials need a block-diagonal cocycle")
            sizes = [len(b) for b in spec.blocks]
            if spec.kind == Kind.TILDE_TOP:
                v = tilde_top_from_blocks(self.block_hi, sizes, spec.s)
            else:
                v = tilde_bottom_from_blocks(self.block_lo, sizes, spec.s)
        return spec.sign * v


def _seed(system: CocycleSystem, symbols: Sequence[int], want_codes: bool) -> _Frontier:
    c = system.cocycle
    sym = np.asarray(symbols, dtype=np.int64)
    P = c.mats[sym].copy()
    m = np.abs(P).reshape(P.shape[0], -1).max(axis=1)
    P /= m[:, None, None]
    ldet = np.log(np.abs(np.linalg.det(c.mats)))[sym]
    return _Frontier(sym, sym.copy(), sym.copy() if want_codes else None, P, np.log(m), ldet)


def _expand(system: CocycleSystem, fr: _Frontier, D: np.ndarray, ldet_gen: np.ndarray) -> _Frontier:
    parent, b = np.nonzero(D[fr.last])
    P, ls = multiply_normalized(system.cocycle.mats, b, fr.P[parent], fr.ls[parent])
    codes = None if fr.codes is None else fr.codes[parent] * system.k + b
    return _Frontier(fr.first[parent], b, codes, P, ls, fr.ldet[parent] + ldet_gen[b])


def _finish(system: CocycleSystem, fr: _Frontier, n: int) -> LevelData:
    c = system.cocycle
    with np.errstate(divide="ignore"):
        la = np.log(singular_values_batch(fr.P)) + fr.ls[:, None]
    if c.d >= 2:
        # smallest singular value from the exactly accumulated determinant
        la[:, -1] = fr.ldet - la[:, :-1].sum(axis=1)
    bh = bl = None
    if c.blocks is not None:
        bh, bl = block_log_extremes(fr.P, c.blocks)
        bh = bh + fr.ls[:, None]
        bl = bl + fr.ls[:, None]
    return LevelData(n, fr.first, fr.last, fr.codes, la, bh, bl)


def _walk(system: CocycleSystem, symbols: Sequence[int], n: int, want_codes: bool):
    """Yield :class:`LevelData` chunks covering the admissible ``n``-words
    that start with one of ``symbols``, in lexicographic order."""
    D = system.sft.dense.astype(bool)
    g = max(1, int(D.sum(axis=1).max()))
    ldet_gen = np.log(np.abs(np.linalg.det(system.cocycle.mats)))

    def rec(fr: _Frontier, depth: int):
        remaining = n - depth
        if remaining == 0:
            yield _finish(system, fr, n)
            return
        if len(fr) * g**remaining <= CHUNK:
            for _ in range(remaining):
                fr = _expand(system, fr, D, ldet_gen)
            yield _finish(system, fr, n)
            return
        if len(fr) > 1:
            size = max(1, CHUNK // g**remaining)
            for i in range(0, len(fr), size):
                yield from rec(fr.slice(i, i + size), depth)
            return
        yield from rec(_expand(system, fr, D, ldet_gen), depth + 1)

    yield from rec(_seed(system, symbols, want_codes), 1)


def _node_count(system: CocycleSystem, n: int) -> int:
    from .symbolic import count_words

    return sum(int(count_words(system.sft, j)) for j in range(1, n + 1))


def _check_budget(system: CocycleSystem, n: int) -> None:
    if n < 1:
        raise ConfigError("level must be >= 1")
    nodes = _node_count(system, n)
    if nodes > NODE_BUDGET:
        raise BudgetExceeded(f"level {n} visits {nodes} word nodes (budget {NODE_BUDGET})")


def _concat(chunks: list[LevelData], n: int) -> LevelData:
    cat = lambda xs: np.concatenate(xs) if xs and xs[0] is not None else None
    return LevelData(
        n,
        cat([c.first for c in chunks]),
        cat([c.last for c in chunks]),
        cat([c.codes for c in chunks]),
        cat([c.log_sv for c in chunks]),
        cat([c.block_hi for c in chunks]),
        cat([c.block_lo for c in chunks]),
    )


def _map_first_symbols(system: CocycleSystem, fn: Callable[[int], object], workers: int | None):
    symbols = range(system.k)
    workers = workers or os.cpu_count() or 1
    if workers <= 1 or system.k == 1:
        return [fn(a) for a in symbols]
    with ThreadPoolExecutor(max_workers=min(workers, system.k)) as ex:
        return list(ex.map(fn, symbols))


def level_data(system: CocycleSystem, n: int, workers: int | None = None) -> LevelData:
    """All admissible ``n``-words with their log singular values (cached)."""
    _check_budget(system, n)
    from .symbolic import count_words

    N = int(count_words(system.sft, n))
    if N > CACHE_WORDS:
        raise BudgetExceeded(f"{N} words at level {n} exceed the in-memory cache")
    want_codes = n * math.log2(max(system.k, 2)) <= 62

    def build():
        parts = _map_first_symbols(
            system, lambda a: list(_walk(system, [a], n, want_codes)), workers
        )
        return _concat([c for part in parts for c in part], n)

    return system.cached(("level", n), build)


# ----------------------------------------------------------------------------
# deterministic log-sum-exp
# ----------------------------------------------------------------------------

def logsumexp(x: np.ndarray) -> float:
    if x.size == 0:
        return -math.inf
    m = float(np.max(x))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(x - m))))


def tree_logsumexp(values: Sequence[float]) -> float:
    """Combine partial log-sums with a fixed pairwise tree."""
    vals = list(values)
    if not vals:
        return -math.inf
    while len(vals) > 1:
        nxt = [float(np.logaddexp(vals[i], vals[i + 1])) for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def _partial_lse_by_first(data: LevelData, pot: np.ndarray, k: int) -> list[float]:
    # words are lexicographic, so each first symbol owns a contiguous run
    bounds = np.searchsorted(data.first, np.arange(k + 1))
    return [logsumexp(pot[bounds[a]:bounds[a + 1]]) for a in range(k)]


def _validate(system: CocycleSystem, spec: PotentialSpec) -> None:
    spec.validate(system.d)
    if spec.kind == Kind.SCALAR and system.d != 1:
        raise ConfigError("SCALAR potentials need d == 1")
    if spec.blocks is not None and system.cocycle.blocks is None:
        raise ConfigError("TILDE potentials need a block-diagonal cocycle with blocks metadata")
    if spec.blocks is not None and tuple(map(tuple, spec.blocks)) != system.cocycle.blocks:
        # partition must match the one used for the cached block data
        raise ConfigError("spec blocks differ from the cocycle's blocks")


# ----------------------------------------------------------------------------
# estimators
# ----------------------------------------------------------------------------

def cylinder_direction(system: CocycleSystem, spec: PotentialSpec) -> Direction:
    if spec.sub_additive:
        return Direction.UPPER_BOUND
    if spec.super_additive and system.sft.is_full:
        return Direction.LOWER_BOUND
    return Direction.HEURISTIC


def cylinder_sum(
    system: CocycleSystem, spec: PotentialSpec, n: int, workers: int | None = None
) -> PressureEstimate:
    """``(1/n) log sum_{|w|=n} exp(potential(A_w))`` over admissible words."""
    t0 = time.perf_counter()
    _validate(system, spec)
    _check_budget(system, n)
    try:
        data = level_data(system, n, workers)
    except BudgetExceeded:
        if _node_count(system, n) > NODE_BUDGET:
            raise
        data = None
    if data is not None:
        parts = _partial_lse_by_first(data, data.potential(spec), system.k)
    else:
        def one(a):
            return tree_logsumexp([logsumexp(ch.potential(spec)) for ch in _walk(system, [a], n, False)])

        parts = _map_first_symbols(system, one, workers)
    value = tree_logsumexp(parts) / n
    return PressureEstimate(
        value, cylinder_direction(system, spec), n, "cylinder_sum", spec,
        (time.perf_counter() - t0) * 1e3,
    )


def _sliding_edges(system: CocycleSystem, n: int, data: LevelData):
    def build():
        k = system.k
        D = system.sft.dense.astype(bool)
        src, b = np.nonzero(D[data.last])
        if n == 1:
            return src, b
        if data.codes is None:
            raise StateBudgetExceeded("block states do not fit int64 codes")
        new = (data.codes[src] % k ** (n - 1)) * k + b
        dst = np.searchsorted(data.codes, new)
        return src, dst

    return system.cached(("edges", n), build)


def block_pressure(
    system: CocycleSystem, spec: PotentialSpec, n: int, workers: int | None = None
) -> PressureEstimate:
    """Exact pressure of the depth-``n`` potential ``w -> potential(A_w)/n``
    on the ``n``-block sliding recoding."""
    t0 = time.perf_counter()
    _validate(system, spec)
    from .symbolic import count_words

    N = int(count_words(system.sft, n))
    if N > STATE_BUDGET:
        raise StateBudgetExceeded(f"{N} block states at level {n} (budget {STATE_BUDGET})")
    data = level_data(system, n, workers)
    pot = data.potential(spec) / n
    src, dst = _sliding_edges(system, n, data)
    shift = float(pot.max())
    M = sp.csr_matrix((np.exp(pot[src] - shift), (src, dst)), shape=(N, N))
    rho = spectral_radius(M)
    value = math.log(rho) + shift
    direction = Direction.UPPER_BOUND if spec.sub_additive else Direction.LOWER_BOUND
    return PressureEstimate(value, direction, n, "block_pressure", spec, (time.perf_counter() - t0) * 1e3)


def super_power_lower(
    system: CocycleSystem, spec: PotentialSpec, k: int, workers: int | None = None
) -> PressureEstimate:
    """``2^-k P(f^(2^k), potential(A_w))`` on the ``2^k``-power shift.

    The power shift's weighted matrix ``M[w, w'] = e^{pot(w)} T[last w, first w']``
    factors through the alphabet, so its Perron root equals that of the
    ``k x k`` matrix ``T @ S`` with ``S[a, b]`` the weight of all words from
    ``a`` to ``b``.
    """
    t0 = time.perf_counter()
    if not spec.super_additive:
        raise SpecNotSuperAdditive(f"{spec.label} is not super-additive")
    _validate(system, spec)
    n = 2**k
    _check_budget(system, n)
    q = system.k
    try:
        data = level_data(system, n, workers)
        chunks: Iterable[LevelData] = [data]
    except BudgetExceeded:
        chunks = _walk(system, range(q), n, False)
    logS = np.full((q, q), -np.inf)
    for ch in chunks:
        pot = ch.potential(spec)
        pair = ch.first * q + ch.last
        order = np.argsort(pair, kind="stable")
        pair_s, pot_s = pair[order], pot[order]
        bounds = np.searchsorted(pair_s, np.arange(q * q + 1))
        for ab in range(q * q):
            seg = pot_s[bounds[ab]:bounds[ab + 1]]
            if seg.size:
                a, b = divmod(ab, q)
                logS[a, b] = np.logaddexp(logS[a, b], logsumexp(seg))
    shift = float(logS[np.isfinite(logS)].max())
    S = np.exp(logS - shift)
    G = system.sft.dense.astype(float) @ S
    rho = spectral_radius(G)
    value = (math.log(rho) + shift) / n
    return PressureEstimate(value, Direction.LOWER_BOUND, k, "super_power_lower", spec, (time.perf_counter() - t0) * 1e3)


# ----------------------------------------------------------------------------
# Lyapunov exponents and free energy
# ----------------------------------------------------------------------------

def _sample_paths(mu: MarkovMeasure, trials: int, horizon: int, seed: int) -> np.ndarray:
    P = mu.dense_P()
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    pi_cum = np.cumsum(mu.pi)
    pi_cum[-1] = 1.0
    U = np.empty((trials, horizon))
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))
        U[t] = rng.random(horizon)
    paths = np.empty((trials, horizon), dtype=np.int64)
    x = np.searchsorted(pi_cum, U[:, 0], side="right")
    paths[:, 0] = x
    for j in range(1, horizon):
        x = (U[:, j, None] >= cum[x]).sum(axis=1)
        paths[:, j] = x
    return paths


def lyapunov_spectrum(
    system: CocycleSystem,
    mu: MarkovMeasure,
    trials: int = DEFAULT_TRIALS,
    horizon: int = DEFAULT_HORIZON,
    seed: int = 0,
) -> LyapunovSpectrum:
    """Lyapunov exponents of the cocycle under a Markov measure.

    Diagonal and conformal cocycles are handled exactly.  Otherwise QR
    accumulation along ``trials`` sampled orbits of length ``horizon``.
    """
    check_compatible(mu, system.sft)
    c = system.cocycle
    if c.is_diagonal:
        coord = mu.pi @ np.log(np.abs(np.diagonal(c.mats, axis1=1, axis2=2)))
        lam = -np.sort(-coord)
        return LyapunovSpectrum(lam, np.zeros(c.d), coord)
    if c.is_conformal:
        scale = singular_values_batch(c.mats)[:, 0]
        lam = np.full(c.d, float(mu.pi @ np.log(scale)))
        return LyapunovSpectrum(lam, np.zeros(c.d), lam.copy())
    paths = _sample_paths(mu, trials, horizon, seed)
    Q = np.broadcast_to(np.eye(c.d), (trials, c.d, c.d)).copy()
    acc = np.zeros((trials, c.d))
    for j in range(horizon):
        Q, R = np.linalg.qr(c.mats[paths[:, j]] @ Q)
        diag = np.diagonal(R, axis1=1, axis2=2)
        acc += np.log(np.abs(diag))
    est = acc / horizon
    est = -np.sort(-est, axis=1)
    lam = est.mean(axis=0)
    stderr = est.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.full(c.d, np.inf)
    return LyapunovSpectrum(lam, stderr)


def free_energy(system: CocycleSystem, mu: MarkovMeasure, spec: PotentialSpec, lyap: LyapunovSpectrum) -> float:
    """Entropy of ``mu`` plus the asymptotic average of the potential,
    written through Lyapunov exponents."""
    _validate(system, spec)
    lam = np.asarray(lyap.lambdas, dtype=float)
    if spec.kind == Kind.TOP:
        F = top_from_log_sv(lam, spec.s)
    elif spec.kind == Kind.BOTTOM:
        F = bottom_from_log_sv(lam, spec.s)
    elif spec.kind == Kind.SCALAR:
        F = spec.s * lam[0]
    else:
        if lyap.coordinate is None or not system.cocycle.is_diagonal:
            raise ConfigError("TILDE free energy needs a diagonal cocycle")
        sizes = [len(b) for b in spec.blocks]
        hi = np.array([lyap.coordinate[list(b)].max() for b in spec.blocks])
        lo = np.array([lyap.coordinate[list(b)].min() for b in spec.blocks])
        if spec.kind == Kind.TILDE_TOP:
            F = tilde_top_from_blocks(hi, sizes, spec.s)
        else:
            F = tilde_bottom_from_blocks(lo, sizes, spec.s)
    return markov_entropy(mu) + spec.sign * float(F)


def free_energy_estimate(
    system: CocycleSystem, mu: MarkovMeasure, spec: PotentialSpec, lyap: LyapunovSpectrum
) -> PressureEstimate:
    t0 = time.perf_counter()
    v = free_energy(system, mu, spec, lyap)
    direction = Direction.LOWER_BOUND if lyap.exact else Direction.HEURISTIC
    return PressureEstimate(v, direction, 0, "free_energy", spec, (time.perf_counter() - t0) * 1e3)


def one_step_gibbs(system: CocycleSystem, spec: PotentialSpec) -> MarkovMeasure:
    """Equilibrium measure of the one-step potential ``i -> potential(A_i)``."""
    from .matrixpot import potential_log
    from .symbolic import LocallyConstantPotential, rpf_gibbs

    pot = LocallyConstantPotential.from_function(
        system.sft, 1, lambda w: potential_log(system.cocycle.mats[w[0]], spec)
    )
    return rpf_gibbs(system.sft, pot).measure


def exact_lyapunov_available(system: CocycleSystem) -> bool:
    return system.cocycle.is_diagonal or system.cocycle.is_conformal


# ----------------------------------------------------------------------------
# profiles
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Levels for each estimator family.

    ``levels`` drive cylinder_sum and block_pressure (word length n);
    ``power_levels`` drive super_power_lower (block length 2^k).
    """

    levels: tuple[int, ...] = (1, 2, 4)
    power_levels: tuple[int, ...] = (0, 1, 2)
    estimators: tuple[str, ...] = ("cylinder_sum", "block_pressure", "super_power_lower", "free_energy")

    def __post_init__(self):
        if not self.levels and not self.power_levels:
            raise ConfigError("schedule must be nonempty")


@dataclass
class ProfileRow:
    s: float
    upper: PressureEstimate | None
    lower: PressureEstimate | None
    trace: list[PressureEstimate]


def estimate_trace(
    system: CocycleSystem, spec: PotentialSpec, schedule: Schedule, workers: int | None = None
) -> list[PressureEstimate]:
    """Run every applicable estimator of ``schedule`` at ``spec``."""
    out: list[PressureEstimate] = []
    est = schedule.estimators
    for n in schedule.levels:
        if "cylinder_sum" in est:
            out.append(cylinder_sum(system, spec, n, workers))
        if "block_pressure" in est:
            out.append(block_pressure(system, spec, n, workers))
    if spec.super_additive and "super_power_lower" in est:
        for k in schedule.power_levels:
            out.append(super_power_lower(system, spec, k, workers))
    if "free_energy" in est and exact_lyapunov_available(system) and system.sft.irreducible:
        mu = system.cached(("gibbs1", spec), lambda: one_step_gibbs(system, spec))
        lyap = lyapunov_spectrum(system, mu)
        out.append(free_energy_estimate(system, mu, spec, lyap))
    return out


def best_bounds(trace: Sequence[PressureEstimate]):
    ups = [e for e in trace if e.direction == Direction.UPPER_BOUND]
    los = [e for e in trace if e.direction == Direction.LOWER_BOUND]
    up = min(ups, key=lambda e: e.value) if ups else None
    lo = max(los, key=lambda e: e.value) if los else None
    return up, lo


def pressure_profile(
    system: CocycleSystem,
    spec_family: PotentialSpec | Callable[[float], PotentialSpec],
    s_grid: Sequence[float],
    schedule: Schedule,
    workers: int | None = None,
) -> list[ProfileRow]:
    """Best certified upper and lower estimates at each ``s`` plus the full
    trace."""
    make = spec_family if callable(spec_family) and not isinstance(spec_family, PotentialSpec) else spec_family.with_s
    rows = []
    for s in s_grid:
        if not 0.0 <= s <= system.d:
            raise ConfigError(f"grid point {s} outside [0, {system.d}]")
        trace = estimate_trace(system, make(float(s)), schedule, workers)
        up, lo = best_bounds(trace)
        rows.append(ProfileRow(float(s), up, lo, trace))
    return rows


TRACE_COLUMNS = ["estimator", "spec", "s", "level", "value", "direction", "wall_time_ms"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def trace_csv(estimates: Iterable[PressureEstimate], timing: bool = False) -> str:
    """RFC-4180 CSV of estimates.  Wall times are left blank unless
    ``timing`` is set, so identical runs give identical bytes."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(TRACE_COLUMNS)
    for e in estimates:
        w.writerow([
            e.estimator,
            e.spec.label if e.spec else "",
            _fmt(e.spec.s) if e.spec else "",
            e.level,
            _fmt(float(e.value)),
            e.direction.value,
            _fmt(float(e.wall_time_ms)) if timing else "",
        ])
    return buf.getvalue()
