"""Small dense linear algebra and singular-value potentials.

All potentials are evaluated in the log domain.  Singular values come from a
batched one-sided (Hestenes) Jacobi iteration, which is cyclic Jacobi on
``M^T M`` carried out implicitly on the columns of ``M``; working on ``M``
keeps small singular values accurate to working precision relative to the
largest one.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BlockMismatch, ConfigError, EmptyWord, SOutOfRange, Singular
from .symbolic import Sft, word_array

D_MAX = 8
JACOBI_TOL = 1e-13
JACOBI_SWEEPS = 60
RENORM_LENGTH = 40


class Kind(enum.Enum):
    TOP = "top"
    BOTTOM = "bottom"
    TILDE_TOP = "tilde_top"
    TILDE_BOTTOM = "tilde_bottom"
    SCALAR = "scalar"


class Orientation(enum.Enum):
    DERIVATIVE = "derivative"
    CONTRACTION = "contraction"


# ----------------------------------------------------------------------------
# singular values
# ----------------------------------------------------------------------------

def singular_values_batch(A: np.ndarray) -> np.ndarray:
    """Singular values of a stack ``(N, d, d)``, each row sorted
    non-increasing."""
    A = np.array(A, dtype=float, copy=True)
    N, d, _ = A.shape
    if d == 1:
        return np.abs(A[:, :, 0])
    if d == 2:
        return _sv2(A)
    for _ in range(JACOBI_SWEEPS):
        worst = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                ap, aq = A[:, :, p], A[:, :, q]
                alpha = np.einsum("ij,ij->i", ap, ap)
                beta = np.einsum("ij,ij->i", aq, aq)
                gamma = np.einsum("ij,ij->i", ap, aq)
                denom = np.sqrt(alpha * beta)
                off = np.divide(np.abs(gamma), denom, out=np.zeros_like(gamma), where=denom > 0)
                worst = max(worst, float(off.max(initial=0.0)))
                rot = off > JACOBI_TOL
                if not rot.any():
                    continue
                g = np.where(rot, gamma, 1.0)
                zeta = (beta - alpha) / (2.0 * g)
                t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                t = np.where(zeta == 0, 1.0, t)
                t = np.where(rot, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c[:, None] * ap - s[:, None] * aq
                new_q = s[:, None] * ap + c[:, None] * aq
                A[:, :, p], A[:, :, q] = new_p, new_q
        if worst <= JACOBI_TOL:
            break
    sv = np.sqrt(np.einsum("nij,nij->nj", A, A))
    return -np.sort(-sv, axis=1)


def _sv2(A: np.ndarray) -> np.ndarray:
    # closed form for 2x2: sigma_1 from the Frobenius norm and |det|,
    # sigma_2 = |det| / sigma_1 (accurate even when sigma_2 << sigma_1)
    a, b, c, d = A[:, 0, 0], A[:, 0, 1], A[:, 1, 0], A[:, 1, 1]
    det = np.abs(a * d - b * c)
    # sigma_1 = (sqrt((a+d)^2+(c-b)^2) + sqrt((a-d)^2+(c+b)^2)) / 2
    s1 = 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, c + b))
    s2 = np.divide(det, s1, out=np.zeros_like(s1), where=s1 > 0)
    return np.stack([s1, s2], axis=1)


def singular_values(M) -> np.ndarray:
    """Singular values sorted non-increasing."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConfigError("matrix entries must be finite")
    return singular_values_batch(M[None])[0]


def min_norm(M) -> float:
    """Smallest singular value, ``1/||M^-1||``."""
    M = np.asarray(M, dtype=float)
    if abs(np.linalg.det(M)) <= 1e-300:
        raise Singular("min_norm of a singular matrix")
    return float(singular_values(M)[-1])


# ----------------------------------------------------------------------------
# potentials
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialSpec:
    """Which singular-value potential, its real parameter and sign.

    ``blocks`` is an ordered partition of ``range(d)`` into contiguous index
    tuples, required for (and only for) the TILDE kinds.  Indices are
    zero-based.
    """

    kind: Kind
    s: float
    sign: int = 1
    blocks: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        tilde = self.kind in (Kind.TILDE_TOP, Kind.TILDE_BOTTOM)
        if tilde != (self.blocks is not None):
            raise ConfigError("blocks are required exactly for TILDE kinds")
        if self.s < 0:
            raise SOutOfRange(f"s={self.s} < 0")

    def with_s(self, s: float) -> "PotentialSpec":
        return PotentialSpec(self.kind, float(s), self.sign, self.blocks)

    def validate(self, d: int) -> None:
        if not (0.0 <= self.s <= d):
            raise SOutOfRange(f"s={self.s} outside [0, {d}]")
        if self.blocks is not None:
            flat = [i for b in self.blocks for i in b]
            if flat != list(range(d)):
                raise BlockMismatch(f"blocks {self.blocks} do not partition range({d}) in order")

    @property
    def sub_additive(self) -> bool:
        """Per-word log sequence sub-additive over concatenation."""
        if self.kind in (Kind.TOP, Kind.TILDE_TOP):
            return self.sign == 1
        if self.kind in (Kind.BOTTOM, Kind.TILDE_BOTTOM):
            return self.sign == -1
        return True

    @property
    def super_additive(self) -> bool:
        if self.kind == Kind.SCALAR:
            return True
        return not self.sub_additive

    @property
    def label(self) -> str:
        sg = "+" if self.sign == 1 else "-"
        return f"{sg}{self.kind.value}"


def top(s, sign=1):
    return PotentialSpec(Kind.TOP, float(s), sign)


def bottom(t, sign=1):
    return PotentialSpec(Kind.BOTTOM, float(t), sign)


def _split(s: float) -> tuple[int, float]:
    m = int(math.floor(s))
    return m, s - m


def top_from_log_sv(la: np.ndarray, s: float) -> np.ndarray:
    """Sum of the ``floor(s)`` largest log singular values plus the
    fractional term; ``la`` sorted non-increasing along the last axis."""
    d = la.shape[-1]
    m, frac = _split(s)
    out = la[..., :m].sum(axis=-1)
    if frac > 0 and m < d:
        out = out + frac * la[..., m]
    return out


def bottom_from_log_sv(la: np.ndarray, t: float) -> np.ndarray:
    return top_from_log_sv(la[..., ::-1], t)


def tilde_top_from_blocks(log_norms: np.ndarray, sizes: Sequence[int], s: float) -> np.ndarray:
    """Leading-block form: ``sum_{j<=d} m_j log||M|E_j|| + (s - r_d) log||M|E_{d+1}||``
    for ``r_d <= s <= r_{d+1}`` with ``r_j`` partial sums of block sizes."""
    r = np.concatenate([[0], np.cumsum(sizes)])
    j = int(np.searchsorted(r, s, side="right")) - 1
    j = min(j, len(sizes) - 1)
    out = np.zeros(log_norms.shape[:-1])
    for i in range(j):
        out = out + sizes[i] * log_norms[..., i]
    frac = s - r[j]
    if frac > 0:
        out = out + frac * log_norms[..., j]
    return out


def tilde_bottom_from_blocks(log_mins: np.ndarray, sizes: Sequence[int], t: float) -> np.ndarray:
    """Trailing-block form: ``sum_{j>k-d} m_j log m(M|E_j) + (t - l_d) log m(M|E_{k-d})``
    for ``l_d <= t <= l_{d+1}`` with ``l_d = m_k + ... + m_{k-d+1}``."""
    return tilde_top_from_blocks(log_mins[..., ::-1], list(sizes)[::-1], t)


def block_log_extremes(A: np.ndarray, blocks) -> tuple[np.ndarray, np.ndarray]:
    """Per-block ``log||A|E_j||`` and ``log m(A|E_j)`` for a block-diagonal
    stack ``(N, d, d)``; returns two ``(N, k)`` arrays."""
    hi, lo = [], []
    for b in blocks:
        idx = np.asarray(b)
        sv = singular_values_batch(A[:, idx[:, None], idx[None, :]])
        with np.errstate(divide="ignore"):
            hi.append(np.log(sv[:, 0]))
            lo.append(np.log(sv[:, -1]))
    return np.stack(hi, axis=1), np.stack(lo, axis=1)


def off_block_mass(A: np.ndarray, blocks) -> np.ndarray:
    """Largest off-block entry relative to the largest entry, per matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 2:
        A = A[None]
    mask = np.ones(A.shape[1:], dtype=bool)
    for b in blocks:
        idx = np.asarray(b)
        mask[np.ix_(idx, idx)] = False
    scale = np.abs(A).reshape(A.shape[0], -1).max(axis=1)
    off = np.abs(A[:, mask]).max(axis=1, initial=0.0)
    return np.divide(off, scale, out=np.zeros_like(off), where=scale > 0)


def potential_log(M, spec: PotentialSpec, log_scale: float = 0.0) -> float:
    """Signed log of the singular-value function of ``M * exp(log_scale)``.

    ``M`` may also be a ``(matrix, log_scale)`` pair as returned by
    :func:`cocycle_product` for long words.
    """
    if isinstance(M, tuple):
        M, log_scale = M
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    spec.validate(d)
    if spec.kind == Kind.SCALAR:
        if d != 1:
            raise ConfigError("SCALAR potentials need d == 1")
        with np.errstate(divide="ignore"):
            return spec.sign * spec.s * (math.log(abs(M[0, 0])) + log_scale)
    if spec.kind in (Kind.TOP, Kind.BOTTOM):
        with np.errstate(divide="ignore"):
            la = np.log(singular_values(M)) + log_scale
        fn = top_from_log_sv if spec.kind == Kind.TOP else bottom_from_log_sv
        return spec.sign * float(fn(la, spec.s))
    if off_block_mass(M, spec.blocks)[0] >= 1e-12:
        raise BlockMismatch("matrix is not block diagonal for the given blocks")
    hi, lo = block_log_extremes(M[None], spec.blocks)
    sizes = [len(b) for b in spec.blocks]
    if spec.kind == Kind.TILDE_TOP:
        val = tilde_top_from_blocks(hi[0] + log_scale, sizes, spec.s)
    else:
        val = tilde_bottom_from_blocks(lo[0] + log_scale, sizes, spec.s)
    return spec.sign * float(val)


# ----------------------------------------------------------------------------
# cocycles
# ----------------------------------------------------------------------------

@dataclass(eq=False)
class MatrixCocycle:
    """Locally constant cocycle: one invertible ``d x d`` matrix per symbol."""

    mats: np.ndarray
    orientation: Orientation = Orientation.DERIVATIVE
    blocks: tuple[tuple[int, ...], ...] | None = None
    expanding: bool = field(init=False)
    contracting: bool = field(init=False)

    def __post_init__(self):
        mats = np.asarray(self.mats, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ConfigError(f"matrices must have shape (k, d, d), got {mats.shape}")
        if not 1 <= mats.shape[1] <= D_MAX:
            raise ConfigError(f"d must be in 1..{D_MAX}")
        if not np.all(np.isfinite(mats)):
            raise ConfigError("matrix entries must be finite")
        if np.any(np.abs(np.linalg.det(mats)) <= 1e-300):
            raise Singular("every generator must be invertible")
        if isinstance(self.orientation, str):
            self.orientation = Orientation(self.orientation)
        self.mats = mats
        sv = singular_values_batch(mats)
        self.expanding = bool(np.all(sv[:, -1] > 1.0))
        self.contracting = bool(np.all(sv[:, 0] < 1.0))
        if self.blocks is not None:
            self.blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
            flat = [i for b in self.blocks for i in b]
            if flat != list(range(self.d)):
                raise BlockMismatch("blocks must partition range(d) in order")
            if np.any(off_block_mass(mats, self.blocks) >= 1e-12):
                raise BlockMismatch("generators are not block diagonal")

    @property
    def d(self) -> int:
        return self.mats.shape[1]

    @property
    def k(self) -> int:
        return self.mats.shape[0]

    @property
    def is_diagonal(self) -> bool:
        off = self.mats * (1 - np.eye(self.d))
        return bool(np.all(off == 0))

    @property
    def is_conformal(self) -> bool:
        """Every generator is a scalar multiple of an orthogonal matrix."""
        sv = singular_values_batch(self.mats)
        return bool(np.all(np.abs(sv[:, 0] - sv[:, -1]) <= 1e-12 * sv[:, 0]))

    def scaled(self, c: float) -> "MatrixCocycle":
        return MatrixCocycle(self.mats * c, self.orientation, self.blocks)

    def to_json(self) -> dict:
        out = {
            "d": self.d,
            "orientation": self.orientation.value,
            "matrices": [m.ravel().tolist() for m in self.mats],
        }
        if self.blocks is not None:
            out["blocks"] = [list(b) for b in self.blocks]
        return out


def cocycle_from_json(obj) -> MatrixCocycle:
    d = int(obj["d"])
    mats = np.array([np.asarray(m, dtype=float).reshape(d, d) for m in obj["matrices"]])
    blocks = obj.get("blocks")
    return MatrixCocycle(
        mats,
        Orientation(obj.get("orientation", "derivative")),
        tuple(tuple(b) for b in blocks) if blocks else None,
    )


def cocycle_product(c: MatrixCocycle, w: Sequence[int], scaled: bool | None = None):
    """``mats[w[n-1]] @ ... @ mats[w[0]]``.

    Words longer than 40 symbols (or ``scaled=True``) are renormalized after
    every factor and returned as ``(matrix, log_scale)``.  Singular value
    ratios below about 1e-300 still underflow in the normalized matrix; the
    word-tree estimators recover the smallest one from the determinant.
    """
    w = list(w)
    if not w:
        raise EmptyWord("cocycle_product of an empty word")
    if scaled is None:
        scaled = len(w) > RENORM_LENGTH
    P = c.mats[w[0]].copy()
    log_scale = 0.0
    for a in w[1:]:
        P = c.mats[a] @ P
        if scaled:
            m = np.abs(P).max()
            P /= m
            log_scale += math.log(m)
    if scaled:
        return P, log_scale
    return P


# ----------------------------------------------------------------------------
# batched products over word trees
# ----------------------------------------------------------------------------

def multiply_normalized(mats: np.ndarray, sym: np.ndarray, P: np.ndarray, log_scale: np.ndarray):
    """``mats[sym] @ P`` for a stack, renormalized by the max-abs entry."""
    d = P.shape[1]
    G = mats[sym]
    if d == 1:
        Q = G * P
    elif d == 2:
        Q = np.empty_like(P)
        Q[:, 0, 0] = G[:, 0, 0] * P[:, 0, 0] + G[:, 0, 1] * P[:, 1, 0]
        Q[:, 0, 1] = G[:, 0, 0] * P[:, 0, 1] + G[:, 0, 1] * P[:, 1, 1]
        Q[:, 1, 0] = G[:, 1, 0] * P[:, 0, 0] + G[:, 1, 1] * P[:, 1, 0]
        Q[:, 1, 1] = G[:, 1, 0] * P[:, 0, 1] + G[:, 1, 1] * P[:, 1, 1]
    else:
        Q = np.matmul(G, P)
    if Q.shape[0] == 0:
        return Q, np.asarray(log_scale, dtype=float).copy()
    m = np.abs(Q).reshape(Q.shape[0], -1).max(axis=1)
    Q /= m[:, None, None]
    return Q, log_scale + np.log(m)


def word_products(c: MatrixCocycle, words: np.ndarray):
    """Normalized products and log scales for an ``(N, n)`` word array."""
    P = c.mats[words[:, 0]].copy()
    m = np.abs(P).reshape(P.shape[0], -1).max(axis=1)
    P /= m[:, None, None]
    ls = np.log(m)
    for j in range(1, words.shape[1]):
        P, ls = multiply_normalized(c.mats, words[:, j], P, ls)
    return P, ls


# ----------------------------------------------------------------------------
# domination
# ----------------------------------------------------------------------------

@dataclass
class DominationReport:
    dominated: bool
    order: str | None
    gaps: list[float]
    length: int
    per_length_min: list[list[float]]


def check_domination(c: MatrixCocycle, sft: Sft, blocks, L: int = 10) -> DominationReport:
    """Finite-length domination test for a block-diagonal cocycle.

    For each consecutive pair of blocks and each length ``n <= L`` the
    minimum over admissible words of ``log m(A_w|E_later) - log||A_w|E_earlier||``
    is computed ("ascending": later blocks expand more), and likewise for the
    reverse order.  The splitting is reported dominated in an order when every
    one of these minima is positive.  ``gaps`` are the per-step margins at
    length ``L``.
    """
    blocks = tuple(tuple(b) for b in blocks)
    if np.any(off_block_mass(c.mats, blocks) >= 1e-12):
        raise BlockMismatch("generators are not block diagonal")
    nb = len(blocks)
    asc_ok = desc_ok = True
    asc_gap = desc_gap = None
    table = []
    for n in range(1, L + 1):
        words = word_array(sft, n)
        P, ls = word_products(c, words)
        hi, lo = block_log_extremes(P, blocks)
        asc = [float((lo[:, j + 1] - hi[:, j]).min()) for j in range(nb - 1)]
        desc = [float((lo[:, j] - hi[:, j + 1]).min()) for j in range(nb - 1)]
        table.append(asc)
        asc_ok &= all(g > 1e-12 for g in asc)
        desc_ok &= all(g > 1e-12 for g in desc)
        asc_gap = [g / n for g in asc]
        desc_gap = [g / n for g in desc]
    if asc_ok and nb > 1:
        return DominationReport(True, "ascending", asc_gap, L, table)
    if desc_ok and nb > 1:
        return DominationReport(True, "descending", desc_gap, L, table)
    return DominationReport(False, None, asc_gap or [], L, table)
