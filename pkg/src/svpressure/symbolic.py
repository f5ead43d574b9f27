"""Subshifts of finite type, block recodings, Markov measures and exact
additive pressure via Perron-Frobenius eigendata.

Words are tuples of ints.  Wherever arrays of words are needed they are
produced in lexicographic order, and that order is part of the contract.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    EmptyRowOrColumn,
    IncompatibleMeasure,
    NonIrreducible,
    NonSquare,
    StateBudgetExceeded,
    ConfigError,
)

log = logging.getLogger(__name__)

STATE_BUDGET = 2**20
# recode_power materializes edges; the state budget alone does not bound them
EDGE_BUDGET = 50_000_000
POWER_TOL = 1e-13
POWER_MAX_ITER = 100_000

Word = tuple


# ----------------------------------------------------------------------------
# Perron-Frobenius machinery
# ----------------------------------------------------------------------------

def _as_csr(M) -> sp.csr_matrix:
    if sp.issparse(M):
        return sp.csr_matrix(M, dtype=float)
    return sp.csr_matrix(np.asarray(M, dtype=float))


def _perron_irreducible(M: sp.csr_matrix, vectors: bool = False):
    """Perron root (and optionally the right eigenvector) of an irreducible
    nonnegative matrix.

    Power iteration on ``M + sigma*I`` started from the all-ones vector.  The
    shift makes the iteration matrix primitive, so periodic matrices converge
    too.  Iteration stops once the Collatz-Wielandt bounds
    ``min_i (Mx)_i/x_i <= rho <= max_i (Mx)_i/x_i`` agree to ``POWER_TOL``
    relative.
    """
    n = M.shape[0]
    if n == 1:
        r = float(M[0, 0]) if M.nnz else 0.0
        return (r, np.ones(1)) if vectors else r
    x = np.ones(n)
    Mx = M @ x
    lo, hi = float(Mx.min()), float(Mx.max())
    sigma = 0.25 * (lo + hi)
    if sigma <= 0.0:
        return (0.0, x) if vectors else 0.0
    rho = 0.5 * (lo + hi)
    for _ in range(POWER_MAX_ITER):
        if hi - lo <= POWER_TOL * hi:
            break
        y = Mx + sigma * x
        y /= y.sum()
        x = y
        Mx = M @ x
        ratio = Mx / x
        lo, hi = float(ratio.min()), float(ratio.max())
        rho = 0.5 * (lo + hi)
    else:
        log.warning("power iteration hit the iteration cap; CW gap %.3g", hi - lo)
    return (rho, x / x.sum()) if vectors else rho


def spectral_radius(M) -> float:
    """Spectral radius of a nonnegative matrix (dense or sparse).

    Reducible matrices are split into strongly connected components; the
    radius is the maximum over the irreducible diagonal blocks.
    """
    A = _as_csr(M)
    ncomp, labels = connected_components(A, directed=True, connection="strong")
    if ncomp == 1:
        return _perron_irreducible(A)
    best = 0.0
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        sub = A[idx][:, idx]
        if sub.nnz == 0:
            continue
        best = max(best, _perron_irreducible(sub.tocsr()))
    return best


def perron_data(M):
    """``(rho, right, left)`` for an irreducible nonnegative matrix, with
    ``left @ right == 1``."""
    A = _as_csr(M)
    ncomp, _ = connected_components(A, directed=True, connection="strong")
    if ncomp != 1:
        raise NonIrreducible("matrix is reducible")
    rho, h = _perron_irreducible(A, vectors=True)
    _, l = _perron_irreducible(A.T.tocsr(), vectors=True)
    l = l / float(l @ h)
    return rho, h, l


# ----------------------------------------------------------------------------
# Sft
# ----------------------------------------------------------------------------

@dataclass(eq=False)
class Sft:
    """One-sided subshift of finite type.

    ``T[i, j] == 1`` means symbol ``j`` may follow symbol ``i``.  Recodings
    carry ``labels``: the block word each state stands for.
    """

    T: np.ndarray | sp.csr_matrix
    irreducible: bool
    labels: tuple | None = None

    @property
    def k(self) -> int:
        return self.T.shape[0]

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.T, dtype=np.int8)

    @cached_property
    def dense(self) -> np.ndarray:
        if sp.issparse(self.T):
            return self.T.toarray().astype(np.int8)
        return np.asarray(self.T, dtype=np.int8)

    @cached_property
    def successors(self) -> list[np.ndarray]:
        A = self.csr
        return [A.indices[A.indptr[i]:A.indptr[i + 1]].copy() for i in range(self.k)]

    @property
    def is_full(self) -> bool:
        return bool(self.csr.nnz == self.k * self.k)

    def allows(self, word: Sequence[int]) -> bool:
        D = self.dense
        return all(D[a, b] for a, b in zip(word, word[1:]))

    def to_json(self) -> dict:
        return {"k": self.k, "transitions": self.dense.astype(int).tolist()}


def validate_sft(T) -> Sft:
    """Check a 0/1 transition matrix and build an :class:`Sft`."""
    if sp.issparse(T):
        A = sp.csr_matrix(T)
        if A.shape[0] != A.shape[1]:
            raise NonSquare(f"transition matrix has shape {A.shape}")
        if A.nnz and not np.all(A.data == 1):
            raise ConfigError("transition entries must be 0 or 1")
        rows = np.diff(A.indptr)
        cols = np.bincount(A.indices, minlength=A.shape[0])
        T_store = A.astype(np.int8)
    else:
        arr = np.asarray(T)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise NonSquare(f"transition matrix has shape {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise ConfigError("transition entries must be 0 or 1")
        arr = arr.astype(np.int8)
        rows, cols = arr.sum(axis=1), arr.sum(axis=0)
        T_store = arr
    if np.any(rows == 0):
        raise EmptyRowOrColumn(f"row {int(np.flatnonzero(rows == 0)[0])} is empty")
    if np.any(cols == 0):
        raise EmptyRowOrColumn(f"column {int(np.flatnonzero(cols == 0)[0])} is empty")
    ncomp, _ = connected_components(sp.csr_matrix(T_store), directed=True, connection="strong")
    return Sft(T_store, irreducible=bool(ncomp == 1))


def full_shift(k: int) -> Sft:
    return validate_sft(np.ones((k, k), dtype=np.int8))


def sft_from_json(obj: Mapping) -> Sft:
    T = np.asarray(obj["transitions"])
    if "k" in obj and int(obj["k"]) != T.shape[0]:
        raise ConfigError(f"k={obj['k']} but transitions has {T.shape[0]} rows")
    return validate_sft(T)


# ----------------------------------------------------------------------------
# Words
# ----------------------------------------------------------------------------

def count_words(sft: Sft, n: int) -> int | float:
    """Number of admissible words of length ``n`` (sum of entries of T^(n-1)).

    Exact integer arithmetic for small alphabets; larger state spaces use
    int64 and fall back to float (with a warning) instead of wrapping.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if sft.k <= 256:
        D = sft.dense.astype(object)
        v = np.array([1] * sft.k, dtype=object)
        for _ in range(n - 1):
            v = D.dot(v)
        return int(v.sum())
    A = sft.csr.astype(np.int64)
    v = np.ones(sft.k, dtype=np.int64)
    maxdeg = int(np.diff(A.indptr).max())
    for i in range(n - 1):
        if int(v.max()) > (2**62) // maxdeg:
            log.warning("count_words overflowed int64; returning float")
            vf = v.astype(float)
            Af = A.astype(float)
            for _ in range(n - 1 - i):
                vf = Af @ vf
            return float(vf.sum())
        v = A @ v
    total = int(v.sum(dtype=object))
    return total


def enumerate_words(sft: Sft, n: int) -> Iterator[Word]:
    """Yield admissible ``n``-words once each, in lexicographic order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    succ = sft.successors
    stack: list[tuple[int, ...]] = [(a,) for a in range(sft.k - 1, -1, -1)]
    while stack:
        w = stack.pop()
        if len(w) == n:
            yield w
            continue
        for b in succ[w[-1]][::-1]:
            stack.append(w + (int(b),))


def word_array(sft: Sft, n: int, limit: int = STATE_BUDGET) -> np.ndarray:
    """All admissible ``n``-words as an ``(N, n)`` int array, lexicographic."""
    D = sft.dense.astype(bool)
    words = np.arange(sft.k, dtype=np.int32)[:, None]
    for _ in range(n - 1):
        parent, b = np.nonzero(D[words[:, -1]])
        if parent.size > limit:
            raise StateBudgetExceeded(f"more than {limit} admissible words of length {n}")
        words = np.concatenate([words[parent], b[:, None].astype(np.int32)], axis=1)
    if words.shape[0] > limit:
        raise StateBudgetExceeded(f"more than {limit} admissible words of length {n}")
    return words


def word_codes(words: np.ndarray, k: int) -> np.ndarray:
    """Base-``k`` integer codes; numeric order equals lexicographic order."""
    n = words.shape[1]
    if n * math.log2(max(k, 2)) > 62:
        raise StateBudgetExceeded("word codes do not fit in int64")
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return words.astype(np.int64) @ powers


def topological_entropy(sft: Sft) -> float:
    """Log of the Perron root of the transition matrix (nats)."""
    return math.log(spectral_radius(sft.csr))


# ----------------------------------------------------------------------------
# Recodings
# ----------------------------------------------------------------------------

def _block_states(sft: Sft, n: int) -> np.ndarray:
    if count_words(sft, n) > STATE_BUDGET:
        raise StateBudgetExceeded(f"{n}-block recoding exceeds {STATE_BUDGET} states")
    return word_array(sft, n)


def sliding_successors(sft: Sft, words: np.ndarray):
    """Edges ``(src, dst)`` of the sliding block graph on ``words``."""
    n = words.shape[1]
    D = sft.dense.astype(bool)
    src, b = np.nonzero(D[words[:, -1]])
    codes = word_codes(words, sft.k)
    new = (codes[src] % sft.k ** (n - 1)) * sft.k + b
    dst = np.searchsorted(codes, new)
    return src, dst


def recode_sliding(sft: Sft, n: int) -> Sft:
    """Higher block presentation: states are admissible ``n``-words and
    ``w -> w'`` when ``w'`` extends the last ``n-1`` symbols of ``w``."""
    if n == 1:
        return Sft(sft.T, sft.irreducible, labels=tuple((a,) for a in range(sft.k)))
    words = _block_states(sft, n)
    src, dst = sliding_successors(sft, words)
    N = words.shape[0]
    T = sp.csr_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(N, N))
    if N <= 4096:
        T = T.toarray()
    labels = tuple(map(tuple, words.tolist()))
    return Sft(T, sft.irreducible, labels=labels)


def recode_power(sft: Sft, n: int) -> Sft:
    """The ``n``-th power shift on ``n``-blocks: ``w -> w'`` when the last
    symbol of ``w`` may be followed by the first symbol of ``w'``."""
    if n == 1:
        return Sft(sft.T, sft.irreducible, labels=tuple((a,) for a in range(sft.k)))
    words = _block_states(sft, n)
    N = words.shape[0]
    # Edge matrix factors as L @ T @ F with L (N x k) and F (k x N) indicators.
    L = sp.csr_matrix((np.ones(N), (np.arange(N), words[:, -1])), shape=(N, sft.k))
    F = sp.csr_matrix((np.ones(N), (words[:, 0], np.arange(N))), shape=(sft.k, N))
    nnz_est = int(np.asarray(L.sum(axis=0)).ravel() @ sft.dense @ np.asarray(F.sum(axis=1)).ravel())
    if nnz_est > EDGE_BUDGET:
        raise StateBudgetExceeded(f"{n}-power recoding has {nnz_est} edges")
    T = (L @ sp.csr_matrix(sft.dense.astype(float)) @ F).tocsr()
    T.data[:] = 1
    T = T.astype(np.int8)
    ncomp, _ = connected_components(T, directed=True, connection="strong")
    if N <= 4096:
        T = T.toarray()
    labels = tuple(map(tuple, words.tolist()))
    return Sft(T, bool(ncomp == 1), labels=labels)


# ----------------------------------------------------------------------------
# Potentials and pressure
# ----------------------------------------------------------------------------

@dataclass(eq=False)
class LocallyConstantPotential:
    """Potential depending on the first ``depth`` symbols.

    ``values[i]`` belongs to the ``i``-th admissible ``depth``-word in
    lexicographic order (``words[i]``).
    """

    depth: int
    words: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.depth < 1:
            raise ConfigError("potential depth must be >= 1")
        if self.values.shape != (self.words.shape[0],):
            raise ConfigError("one value per admissible word is required")

    @classmethod
    def from_dict(cls, sft: Sft, depth: int, mapping: Mapping) -> "LocallyConstantPotential":
        words = word_array(sft, depth)
        table = {}
        for key, val in mapping.items():
            w = tuple(int(c) for c in key) if isinstance(key, str) else tuple(key)
            table[w] = float(val)
        wanted = [tuple(w) for w in words.tolist()]
        missing = [w for w in wanted if w not in table]
        extra = set(table) - set(wanted)
        if missing or extra:
            raise ConfigError(
                f"potential table must cover exactly the admissible {depth}-words "
                f"(missing {missing[:3]}, inadmissible {sorted(extra)[:3]})"
            )
        return cls(depth, words, np.array([table[w] for w in wanted]))

    @classmethod
    def from_function(cls, sft: Sft, depth: int, fn) -> "LocallyConstantPotential":
        words = word_array(sft, depth)
        return cls(depth, words, np.array([fn(tuple(w)) for w in words.tolist()], dtype=float))

    @classmethod
    def constant(cls, sft: Sft, c: float, depth: int = 1) -> "LocallyConstantPotential":
        words = word_array(sft, depth)
        return cls(depth, words, np.full(words.shape[0], float(c)))

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "values": {"".join(map(str, w)): float(v) for w, v in zip(self.words.tolist(), self.values)},
        }


def potential_from_json(sft: Sft, obj: Mapping) -> LocallyConstantPotential:
    return LocallyConstantPotential.from_dict(sft, int(obj["depth"]), obj["values"])


def transfer_matrix(sft: Sft, values: np.ndarray, depth: int, shift: float = 0.0) -> sp.csr_matrix:
    """``M[w, w'] = exp(values[w] - shift)`` on the sliding ``depth``-block
    graph (states ordered as :func:`word_array`)."""
    if depth == 1:
        D = sft.csr.astype(float)
        return sp.diags(np.exp(values - shift)) @ D
    words = _block_states(sft, depth)
    src, dst = sliding_successors(sft, words)
    N = words.shape[0]
    return sp.csr_matrix((np.exp(values[src] - shift), (src, dst)), shape=(N, N))


def additive_pressure(sft: Sft, pot: LocallyConstantPotential) -> float:
    """Exact pressure of a locally constant potential: log of the Perron
    root of the weighted block transfer matrix."""
    if not sft.irreducible:
        log.info("additive_pressure on a reducible SFT: maximum over components")
    shift = float(pot.values.max())
    M = transfer_matrix(sft, pot.values, pot.depth, shift)
    rho = spectral_radius(M)
    return math.log(rho) + shift if rho > 0 else -math.inf


# ----------------------------------------------------------------------------
# Markov measures
# ----------------------------------------------------------------------------

@dataclass(eq=False)
class MarkovMeasure:
    """Stationary Markov measure; states are symbols, or blocks if ``labels``
    is set."""

    P: np.ndarray | sp.csr_matrix
    pi: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        P = self.P
        rows = np.asarray(P.sum(axis=1)).ravel()
        if np.any(np.abs(rows - 1.0) > 1e-12):
            raise IncompatibleMeasure("rows of P must sum to 1")
        pi = np.asarray(self.pi, dtype=float)
        if abs(pi.sum() - 1.0) > 1e-12 or np.any(pi < 0):
            raise IncompatibleMeasure("pi must be a probability vector")
        piP = (P.T @ pi) if sp.issparse(P) else pi @ P
        if np.max(np.abs(piP - pi)) > 1e-12:
            raise IncompatibleMeasure("pi is not stationary for P")
        self.pi = pi

    @classmethod
    def from_matrix(cls, P, labels=None) -> "MarkovMeasure":
        """Stationary measure of an irreducible stochastic matrix."""
        P = np.asarray(P, dtype=float) if not sp.issparse(P) else sp.csr_matrix(P)
        _, _, left = perron_data(P)
        return cls(P, left / left.sum(), labels)

    def dense_P(self) -> np.ndarray:
        return self.P.toarray() if sp.issparse(self.P) else np.asarray(self.P)


def bernoulli(p: Sequence[float]) -> MarkovMeasure:
    p = np.asarray(p, dtype=float)
    return MarkovMeasure(np.tile(p, (p.size, 1)), p.copy())


def check_compatible(mu: MarkovMeasure, sft: Sft) -> None:
    P = mu.dense_P()
    if P.shape != (sft.k, sft.k):
        raise IncompatibleMeasure(f"measure has {P.shape[0]} states, SFT has {sft.k}")
    if np.any((P > 0) & (sft.dense == 0)):
        raise IncompatibleMeasure("measure charges a forbidden transition")


def random_markov_measure(sft: Sft, rng: np.random.Generator) -> MarkovMeasure:
    """Random stationary Markov measure supported on the allowed transitions
    (all of them, so the chain is irreducible when ``sft`` is)."""
    W = rng.exponential(size=(sft.k, sft.k)) * sft.dense
    return MarkovMeasure.from_matrix(W / W.sum(axis=1, keepdims=True))


def markov_entropy(mu: MarkovMeasure) -> float:
    """``-sum_i pi_i sum_j P_ij log P_ij`` with ``0 log 0 = 0``."""
    if sp.issparse(mu.P):
        P = sp.coo_matrix(mu.P)
        v = P.data
        return float(-np.sum(mu.pi[P.row] * v * np.log(v, where=v > 0, out=np.zeros_like(v))))
    P = np.asarray(mu.P)
    terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return float(-(mu.pi @ terms.sum(axis=1)))


def cylinder_log_masses(mu: MarkovMeasure, words: np.ndarray) -> np.ndarray:
    """``log mu[w]`` for an array of words over the measure's states."""
    P = mu.dense_P()
    with np.errstate(divide="ignore"):
        out = np.log(mu.pi[words[:, 0]])
        for j in range(1, words.shape[1]):
            out = out + np.log(P[words[:, j - 1], words[:, j]])
    return out


def potential_average(mu: MarkovMeasure, pot: LocallyConstantPotential) -> float:
    """``int pot dmu`` for a symbol-level Markov measure."""
    lm = cylinder_log_masses(mu, pot.words)
    return float(np.sum(np.exp(lm) * pot.values))


class GibbsResult(NamedTuple):
    pressure: float
    measure: MarkovMeasure
    gibbs_constant: float


def rpf_gibbs(sft: Sft, pot: LocallyConstantPotential) -> GibbsResult:
    """Equilibrium state of a locally constant potential.

    The measure lives on the sliding ``depth``-block recoding (identical to
    ``sft`` when ``depth == 1``).  For a cylinder ``w`` of length
    ``n >= depth`` with Birkhoff sum over its ``n - depth + 1`` complete
    windows, ``mu[w] / exp(-n P + S(w))`` lies in ``[1/C, C]``.
    """
    if not sft.irreducible:
        raise NonIrreducible("rpf_gibbs needs an irreducible SFT")
    m = pot.depth
    shift = float(pot.values.max())
    M = transfer_matrix(sft, pot.values, m, shift)
    rho, h, l = perron_data(M)
    P = sp.diags(1.0 / (rho * h)) @ M @ sp.diags(h)
    P = sp.csr_matrix(P)
    # renormalize rows to kill the residual of the eigen-solve
    rs = np.asarray(P.sum(axis=1)).ravel()
    P = sp.csr_matrix(sp.diags(1.0 / rs) @ P)
    pi = l * h
    pi = pi / pi.sum()
    if P.shape[0] <= 4096:
        P = P.toarray()
    pressure = math.log(rho) + shift
    labels = tuple(map(tuple, pot.words.tolist()))
    # re-solve pi from P so that stationarity holds to rounding
    measure = MarkovMeasure.from_matrix(P, labels=labels)
    # mu[w]/exp(-nP+S) = l(b0) h(b_r) exp(m*P - pot(b_r)), see docstring
    log_l = np.log(l)
    log_hr = np.log(h) + m * pressure - pot.values
    hi = log_l.max() + log_hr.max()
    lo = log_l.min() + log_hr.min()
    C = math.exp(max(hi, -lo, 0.0))
    return GibbsResult(pressure, measure, C)


@dataclass
class GibbsReport:
    passed: bool
    worst_ratio_high: float
    worst_ratio_low: float
    worst_cylinder: tuple
    cylinders_checked: int
    constant: float


def gibbs_check(
    sft: Sft,
    pot: LocallyConstantPotential,
    result: GibbsResult,
    max_len: int = 12,
    rtol: float = 1e-10,
) -> GibbsReport:
    """Exhaustively test the two-sided Gibbs inequality on every cylinder of
    length ``depth..max_len``."""
    m = pot.depth
    mu = result.measure
    P = mu.dense_P()
    codes = word_codes(pot.words, sft.k)
    C = result.gibbs_constant
    worst_hi, worst_lo = -math.inf, math.inf
    worst_word: tuple = ()
    worst_dev = -math.inf
    checked = 0
    words = word_array(sft, m)
    state = np.arange(words.shape[0])  # block index of the last window
    log_mu = np.log(mu.pi[state])
    S = pot.values[state].copy()
    D = sft.dense.astype(bool)
    n = m
    while True:
        log_ratio = log_mu - (-n * result.pressure + S)
        i_hi, i_lo = int(np.argmax(log_ratio)), int(np.argmin(log_ratio))
        worst_hi = max(worst_hi, float(log_ratio[i_hi]))
        worst_lo = min(worst_lo, float(log_ratio[i_lo]))
        for i in (i_hi, i_lo):
            dev = abs(float(log_ratio[i]))
            if dev > worst_dev:
                worst_dev, worst_word = dev, tuple(words[i].tolist())
        checked += words.shape[0]
        if n == max_len:
            break
        parent, b = np.nonzero(D[words[:, -1]])
        words = np.concatenate([words[parent], b[:, None].astype(words.dtype)], axis=1)
        new_state = np.searchsorted(codes, word_codes(words[:, -m:], sft.k))
        log_mu = log_mu[parent] + np.log(P[state[parent], new_state])
        S = S[parent] + pot.values[new_state]
        state = new_state
        n += 1
    bound = math.log(C) + rtol
    passed = worst_hi <= bound and worst_lo >= -bound
    return GibbsReport(passed, math.exp(worst_hi), math.exp(worst_lo), worst_word, checked, C)


def corrupt_measure(mu: MarkovMeasure, factor: float, state: int = 0) -> MarkovMeasure:
    """Copy of ``mu`` with row ``state`` of P skewed; for negative tests.

    Mass in the row is shifted toward its first allowed successor and pi is
    recomputed, so the result is still a valid Markov measure.
    """
    P = mu.dense_P().copy()
    row = P[state]
    nz = np.flatnonzero(row)
    if nz.size < 2:
        raise ConfigError("need a row with at least two transitions to corrupt")
    row[nz[1:]] /= factor
    row[nz[0]] = 1.0 - row[nz[1:]].sum()
    return MarkovMeasure.from_matrix(P, labels=mu.labels)


__all__ = [
    "Sft", "validate_sft", "full_shift", "sft_from_json", "count_words", "enumerate_words",
    "word_array", "word_codes", "topological_entropy", "recode_sliding", "recode_power",
    "LocallyConstantPotential", "potential_from_json", "additive_pressure", "spectral_radius",
    "perron_data", "MarkovMeasure", "bernoulli", "random_markov_measure", "markov_entropy",
    "potential_average", "rpf_gibbs", "GibbsResult", "gibbs_check", "GibbsReport",
    "check_compatible", "cylinder_log_masses", "corrupt_measure", "transfer_matrix",
]
