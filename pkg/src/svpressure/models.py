"""Concrete dynamical systems and their geometric realizers.

Each builder returns a :class:`Model`: the symbolic system the estimators see
plus a realizer that can produce the actual cylinder pieces for box counting.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    ConfigError,
    EmptyDigitSet,
    InvariantBroken,
    NotContracting,
    NotExpanding,
    NotMarkov,
    PressureError,
)
from .matrixpot import MatrixCocycle, Orientation, cocycle_from_json, singular_values_batch
from .pressure import CocycleSystem
from .symbolic import full_shift, validate_sft

EPS = 1e-12
MAX_PIECES = 1 << 23


def _snap(x: np.ndarray) -> np.ndarray:
    # absorb rounding so grid points computed as 0.4999999 land on 0.5
    r = np.round(x)
    return np.where(np.abs(x - r) <= 1e-9, r, x)


def _grid_boxes(lo: np.ndarray, hi: np.ndarray, n: int) -> int:
    """Number of half-open dyadic boxes of side ``2^-n`` meeting the pieces
    ``[lo, hi]`` (rows are pieces, columns coordinates).  Pieces are assumed
    shorter than one box, so each meets at most two boxes per coordinate."""
    scale = float(2**n)
    a = np.floor(_snap(lo * scale)).astype(np.int64)
    b = np.ceil(_snap(hi * scale)).astype(np.int64) - 1
    b = np.maximum(a, b)
    return _distinct_boxes(a, b)


def _distinct_boxes(a: np.ndarray, b: np.ndarray) -> int:
    d = a.shape[1]
    if np.any(b - a > 1):
        raise ConfigError("pieces wider than one box")
    keys = []
    for corner in range(1 << d):
        pick = [(corner >> j) & 1 for j in range(d)]
        idx = np.stack([np.where(pick[j], b[:, j], a[:, j]) for j in range(d)], axis=1)
        keys.append(idx)
    allidx = np.unique(np.concatenate(keys), axis=0)
    return int(allidx.shape[0])


# ----------------------------------------------------------------------------
# one-dimensional piecewise linear Markov maps
# ----------------------------------------------------------------------------

@dataclass
class PiecewiseLinearMap1D:
    """Branch ``i`` maps ``intervals[i]`` linearly onto ``images[i]`` with
    signed slope ``slopes[i]``.  Images default to ``[0, 1]``."""

    intervals: list[tuple[float, float]]
    slopes: list[float]
    images: list[tuple[float, float]] | None = None
    transitions: list[list[int]] | None = None

    def to_json(self) -> dict:
        out = {"type": "pl1d", "intervals": [list(i) for i in self.intervals], "slopes": list(self.slopes)}
        if self.images is not None:
            out["images"] = [list(i) for i in self.images]
        if self.transitions is not None:
            out["transitions"] = self.transitions
        return out


@dataclass
class IntervalRealizer:
    intervals: np.ndarray  # (k, 2)
    inv_scale: np.ndarray  # inverse branch g_i(y) = inv_scale[i] * y + inv_shift[i]
    inv_shift: np.ndarray
    sft: object
    d: int = 1

    def _depth_for(self, n: int) -> int:
        width = float(np.max(self.intervals[:, 1] - self.intervals[:, 0]))
        c = float(np.max(np.abs(self.inv_scale)))
        p = 1
        while width * c ** (p - 1) >= 2.0 ** (-n) / 2:
            p += 1
        return p

    def pieces(self, p: int) -> np.ndarray:
        """Cylinder intervals of length ``p`` as a ``(N, 2)`` array."""
        D = self.sft.dense.astype(bool)
        k = self.intervals.shape[0]
        # h = g_{w0} o ... o g_{w_{j-1}}, starting from the identity
        alpha, beta, last = np.ones(k), np.zeros(k), np.arange(k)
        for j in range(1, p):
            parent, b = np.nonzero(D[last])
            if b.size > MAX_PIECES:
                raise BudgetExceeded(f"more than {MAX_PIECES} pieces at depth {j + 1}")
            a_p, b_p = alpha[parent], beta[parent]
            s_par = self.inv_scale[last[parent]]
            t_par = self.inv_shift[last[parent]]
            alpha, beta = a_p * s_par, a_p * t_par + b_p
            last = b
        lo = alpha * self.intervals[last, 0] + beta
        hi = alpha * self.intervals[last, 1] + beta
        return np.stack([np.minimum(lo, hi), np.maximum(lo, hi)], axis=1)

    def box_count(self, n: int) -> int:
        P = self.pieces(self._depth_for(n))
        return _grid_boxes(P[:, :1], P[:, 1:], n)


def build_1d(m: PiecewiseLinearMap1D, name: str = "pl1d") -> "Model":
    I = np.asarray(m.intervals, dtype=float)
    k = I.shape[0] if I.ndim == 2 else 0
    if k == 0 or I.shape[1] != 2 or len(m.slopes) != k:
        raise ConfigError("need one slope per interval")
    if np.any(I[:, 1] <= I[:, 0]):
        raise ConfigError("intervals must have positive length")
    order = np.argsort(I[:, 0])
    if np.any(I[order][1:, 0] < I[order][:-1, 1] - EPS):
        raise ConfigError("branch intervals overlap")
    sig = np.asarray(m.slopes, dtype=float)
    if np.any(np.abs(sig) <= 1.0):
        raise NotExpanding("every branch needs |slope| > 1")
    J = np.tile([0.0, 1.0], (k, 1)) if m.images is None else np.asarray(m.images, dtype=float)
    if J.shape != (k, 2) or np.any(J[:, 1] <= J[:, 0]):
        raise ConfigError("one nondegenerate image interval per branch")
    if not np.allclose(np.abs(sig) * (I[:, 1] - I[:, 0]), J[:, 1] - J[:, 0], rtol=1e-9, atol=EPS):
        raise ConfigError("slope times interval length must equal the image length")
    T = np.zeros((k, k), dtype=np.int8)
    for i in range(k):
        for j in range(k):
            inside = I[j, 0] >= J[i, 0] - EPS and I[j, 1] <= J[i, 1] + EPS
            apart = I[j, 1] <= J[i, 0] + EPS or I[j, 0] >= J[i, 1] - EPS
            if not (inside or apart):
                raise NotMarkov(f"image of branch {i} cuts branch {j}")
            T[i, j] = inside
    if m.transitions is not None:
        Tg = np.asarray(m.transitions, dtype=np.int8)
        if Tg.shape != (k, k) or np.any(Tg > T):
            raise NotMarkov("transitions must be a sub-graph of the geometric incidence")
        T = Tg
    sft = validate_sft(T)
    x0 = I[:, 0]
    y0 = np.where(sig > 0, J[:, 0], J[:, 1])
    inv_scale = 1.0 / sig
    inv_shift = x0 - y0 * inv_scale
    coc = MatrixCocycle(sig.reshape(k, 1, 1), Orientation.DERIVATIVE)
    system = CocycleSystem(sft, coc, name=name, origin="pl1d")
    return Model(name, system, IntervalRealizer(I, inv_scale, inv_shift, sft), m.to_json())


def cookie_cutter(slopes: Sequence[float]) -> PiecewiseLinearMap1D:
    """Full-branch map with intervals of length ``1/slope`` spread over
    ``[0, 1]`` with equal gaps."""
    lens = [1.0 / s for s in slopes]
    if sum(lens) > 1 + EPS:
        raise ConfigError("branch lengths exceed the unit interval")
    gap = (1.0 - sum(lens)) / (len(lens) - 1) if len(lens) > 1 else 0.0
    x, ivs = 0.0, []
    for L in lens:
        ivs.append((x, x + L))
        x += L + gap
    ivs[-1] = (1.0 - lens[-1], 1.0)
    return PiecewiseLinearMap1D(ivs, list(slopes))


# ----------------------------------------------------------------------------
# diagonal toral endomorphisms
# ----------------------------------------------------------------------------

@dataclass
class DiagonalToralSystem:
    """``x -> diag(factors) x mod 1`` restricted to points whose digit vectors
    lie in ``digits`` (optionally with digit transitions)."""

    factors: tuple[int, ...]
    digits: list[tuple[int, ...]]
    transitions: list[list[int]] | None = None

    def to_json(self) -> dict:
        out = {"type": "toral", "factors": list(self.factors), "digits": [list(x) for x in self.digits]}
        if self.transitions is not None:
            out["transitions"] = self.transitions
        return out


@dataclass
class RectRealizer:
    factors: np.ndarray  # (d,) ints
    digits: np.ndarray  # (k, d) ints
    sft: object

    @property
    def d(self) -> int:
        return self.factors.shape[0]

    def _digits_for(self, n: int) -> np.ndarray:
        # per-coordinate depth with f^p >= 2^(n+2), so each piece meets <= 2^d boxes
        p = np.ones(self.d, dtype=np.int64)
        for i, f in enumerate(self.factors.tolist()):
            while f ** int(p[i]) < 2 ** (n + 2):
                p[i] += 1
        return p

    def corners(self, p: int) -> np.ndarray:
        """Integer lower corners of the depth-``p`` rectangles; the rectangle
        for row ``r`` is ``[c_r / f^p, (c_r + 1) / f^p)`` per coordinate."""
        if int(self.factors.max()) ** p >= 2**62:
            raise BudgetExceeded("corner numerators overflow int64")
        D = self.sft.dense.astype(bool)
        k = self.digits.shape[0]
        num, last = self.digits.astype(np.int64).copy(), np.arange(k)
        for j in range(1, p):
            parent, b = np.nonzero(D[last])
            if b.size > MAX_PIECES:
                raise BudgetExceeded(f"more than {MAX_PIECES} pieces at depth {j + 1}")
            num = num[parent] * self.factors + self.digits[b]
            last = b
        return num

    def approximate_squares(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Distinct pieces refined per coordinate to width below ``2^-(n+2)``.

        Coordinate ``i`` stops taking digits after ``p_i`` steps; pieces with
        equal truncated corners and equal last symbol have equal futures and
        are merged.  Returns integer corners and denominators ``f^p``.
        """
        p = self._digits_for(n)
        den = self.factors.astype(np.int64) ** p
        if int(den.max()) >= 2**62 >> (n + 1):
            raise BudgetExceeded("box indices overflow int64")
        D = self.sft.dense.astype(bool)
        k = self.digits.shape[0]
        num, last = self.digits.astype(np.int64).copy(), np.arange(k)
        for j in range(1, int(p.max())):
            parent, b = np.nonzero(D[last])
            if b.size > MAX_PIECES:
                raise BudgetExceeded(f"more than {MAX_PIECES} pieces at depth {j + 1}")
            live = j < p
            num = np.where(live, num[parent] * self.factors + self.digits[b], num[parent])
            last = b
            num, last = _unique_states(num, last, den, k)
        return num, den

    def box_count(self, n: int) -> int:
        num, den = self.approximate_squares(n)
        # exact: [num, num+1) / den meets boxes floor(num 2^n/den) .. ceil((num+1) 2^n/den) - 1
        a = (num << n) // den
        b = (((num + 1) << n) - 1) // den
        return _distinct_boxes(a, b)


def _unique_states(num: np.ndarray, last: np.ndarray, den: np.ndarray, k: int):
    """Drop duplicate ``(corner, last symbol)`` rows."""
    if math.prod(int(x) for x in den) * k < 2**62:
        key = last.astype(np.int64)
        for i in range(num.shape[1]):
            key = key * int(den[i]) + num[:, i]
        _, idx = np.unique(key, return_index=True)
    else:
        _, idx = np.unique(np.concatenate([num, last[:, None]], axis=1), axis=0, return_index=True)
    return num[idx], last[idx]


def build_toral(m: DiagonalToralSystem, name: str = "toral") -> "Model":
    f = np.asarray(m.factors, dtype=np.int64)
    if f.ndim != 1 or f.size < 1 or np.any(f < 2):
        raise ConfigError("factors must be integers >= 2")
    if not m.digits:
        raise EmptyDigitSet("digit set is empty")
    dg = np.asarray(m.digits, dtype=np.int64)
    if dg.ndim != 2 or dg.shape[1] != f.size:
        raise ConfigError("each digit needs one entry per factor")
    if np.any(dg < 0) or np.any(dg >= f):
        raise ConfigError("digits must satisfy 0 <= digit < factor")
    if np.unique(dg, axis=0).shape[0] != dg.shape[0]:
        raise ConfigError("digits must be distinct")
    k = dg.shape[0]
    sft = full_shift(k) if m.transitions is None else validate_sft(m.transitions)
    mats = np.broadcast_to(np.diag(f.astype(float)), (k, f.size, f.size)).copy()
    blocks = tuple((i,) for i in range(f.size))
    coc = MatrixCocycle(mats, Orientation.DERIVATIVE, blocks)
    system = CocycleSystem(sft, coc, name=name, origin="toral")
    return Model(name, system, RectRealizer(f, dg, sft), m.to_json())


# ----------------------------------------------------------------------------
# self-affine iterated function systems
# ----------------------------------------------------------------------------

@dataclass
class SelfAffineIfs:
    mats: list
    translations: list
    transitions: list[list[int]] | None = None

    def to_json(self) -> dict:
        A = np.asarray(self.mats, dtype=float)
        out = {"type": "ifs", "matrices": [a.ravel().tolist() for a in A],
               "translations": [list(map(float, t)) for t in self.translations]}
        if self.transitions is not None:
            out["transitions"] = self.transitions
        return out


@dataclass
class PointRealizer:
    mats: np.ndarray
    shifts: np.ndarray
    sft: object

    @property
    def d(self) -> int:
        return self.mats.shape[1]

    def _radius(self) -> float:
        # f_i(B_R) lies in B_R once |t_i| + |A_i| R <= R
        c = float(singular_values_batch(self.mats)[:, 0].max())
        return float(np.linalg.norm(self.shifts, axis=1).max()) / (1.0 - c) + EPS

    def points(self, delta: float) -> np.ndarray:
        """Images of the origin under all admissible compositions whose
        pieces have diameter below ``delta``."""
        R = self._radius()
        D = self.sft.dense.astype(bool)
        k = self.mats.shape[0]
        L, c, last = self.mats.copy(), self.shifts.copy(), np.arange(k)
        while 2 * R * float(np.linalg.norm(L, ord=2, axis=(1, 2)).max()) >= delta:
            parent, b = np.nonzero(D[last])
            if b.size > MAX_PIECES:
                raise BudgetExceeded(f"more than {MAX_PIECES} pieces")
            c = np.einsum("nij,nj->ni", L[parent], self.shifts[b]) + c[parent]
            L = L[parent] @ self.mats[b]
            last = b
        return c

    def box_count(self, n: int) -> int:
        pts = self.points(2.0 ** (-n) / 2)
        return _grid_boxes(pts, pts, n)


def build_ifs(m: SelfAffineIfs, name: str = "ifs") -> "Model":
    A = np.asarray(m.mats, dtype=float)
    if A.ndim == 2:
        d = int(round(math.sqrt(A.shape[1])))
        A = A.reshape(A.shape[0], d, d)
    t = np.asarray(m.translations, dtype=float)
    if A.ndim != 3 or t.shape != A.shape[:2]:
        raise ConfigError("need one d-vector translation per d x d matrix")
    k, d = A.shape[:2]
    coc = MatrixCocycle(A, Orientation.CONTRACTION)
    if not coc.contracting:
        raise NotContracting("every IFS map needs all singular values < 1")
    sft = full_shift(k) if m.transitions is None else validate_sft(m.transitions)
    system = CocycleSystem(sft, coc, name=name, origin="ifs")
    return Model(name, system, PointRealizer(A, t, sft), m.to_json())


# ----------------------------------------------------------------------------
# bare cocycles and perturbations
# ----------------------------------------------------------------------------

@dataclass
class Model:
    name: str
    system: CocycleSystem
    realizer: object | None = None
    config: dict = field(default_factory=dict)


def build_cocycle(obj: Mapping, name: str = "cocycle") -> Model:
    coc = cocycle_from_json(obj)
    sft = full_shift(coc.k) if obj.get("transitions") is None else validate_sft(obj["transitions"])
    return Model(name, CocycleSystem(sft, coc, name=name, origin="cocycle"), None, dict(obj))


@dataclass
class PerturbationFamily:
    """``A_i(eps) = A_i + eps * direction_i``."""

    base: CocycleSystem
    direction: np.ndarray

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=float)
        if self.direction.shape != self.base.cocycle.mats.shape:
            raise ConfigError("perturbation direction must match the generator array")


def perturb(family: PerturbationFamily, eps: float) -> CocycleSystem:
    """Member ``eps`` of the family; it must stay invertible and keep the
    base system's expansion or contraction."""
    base = family.base
    mats = base.cocycle.mats + eps * family.direction
    try:
        coc = MatrixCocycle(mats, base.cocycle.orientation, base.cocycle.blocks)
    except PressureError as e:
        raise InvariantBroken(f"eps={eps}: {e}") from e
    if base.cocycle.expanding and not coc.expanding:
        raise InvariantBroken(f"eps={eps} loses expansion")
    if base.cocycle.contracting and not coc.contracting:
        raise InvariantBroken(f"eps={eps} loses contraction")
    md = dict(base.metadata, eps=float(eps))
    return CocycleSystem(base.sft, coc, base.name, base.origin, md)


# ----------------------------------------------------------------------------
# zoo and JSON loading
# ----------------------------------------------------------------------------

def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def zoo() -> dict[str, Mapping]:
    """Named model configurations, in the same JSON form :func:`load_model`
    accepts."""
    return {
        "doubling": PiecewiseLinearMap1D([(0.0, 0.5), (0.5, 1.0)], [2.0, 2.0]).to_json(),
        "golden_doubling": PiecewiseLinearMap1D(
            [(0.0, 0.5), (0.5, 1.0)], [2.0, 2.0], transitions=[[1, 1], [1, 0]]
        ).to_json(),
        "cookie23": cookie_cutter([2.0, 3.0]).to_json(),
        "cantor": cookie_cutter([3.0, 3.0]).to_json(),
        "toral24": DiagonalToralSystem((2, 4), [(0, 0), (1, 1), (0, 3)]).to_json(),
        "sponge23": DiagonalToralSystem((2, 3), [(0, 0), (1, 1), (0, 2)]).to_json(),
        "conformal33": DiagonalToralSystem((3, 3), [(0, 0), (2, 0), (1, 1), (0, 2)]).to_json(),
        "rot3": {
            "type": "cocycle", "d": 2, "orientation": "derivative",
            "matrices": [(3.0 * _rot(2 * math.pi * i / 9)).ravel().tolist() for i in range(9)],
        },
        "ifs_affine": SelfAffineIfs(
            [np.diag([0.5, 0.25])] * 3, [(0.0, 0.0), (0.5, 0.0), (0.0, 0.75)]
        ).to_json(),
        "ifs_cantor": SelfAffineIfs([[[1 / 3]], [[1 / 3]]], [(0.0,), (2 / 3,)]).to_json(),
    }


def model_from_json(obj: Mapping, name: str | None = None) -> Model:
    if "zoo" in obj:
        key = obj["zoo"]
        z = zoo()
        if key not in z:
            raise ConfigError(f"unknown zoo model {key!r}; known: {sorted(z)}")
        return model_from_json(z[key], name or key)
    kind = obj.get("type")
    name = name or obj.get("name") or str(kind)
    tr = obj.get("transitions")
    if kind == "pl1d":
        ims = obj.get("images")
        m = PiecewiseLinearMap1D([tuple(i) for i in obj["intervals"]], list(obj["slopes"]),
                                 None if ims is None else [tuple(i) for i in ims], tr)
        return build_1d(m, name)
    if kind == "toral":
        return build_toral(DiagonalToralSystem(tuple(obj["factors"]), [tuple(x) for x in obj["digits"]], tr), name)
    if kind == "ifs":
        return build_ifs(SelfAffineIfs(obj["matrices"], obj["translations"], tr), name)
    if kind == "cocycle":
        return build_cocycle(obj, name)
    raise ConfigError(f"unknown model type {kind!r}")


def load_model(spec: str | Path | Mapping) -> Model:
    """Load from a mapping, a JSON file path, or a zoo name."""
    if isinstance(spec, Mapping):
        return model_from_json(spec)
    s = str(spec)
    if s in zoo():
        return model_from_json({"zoo": s})
    p = Path(s)
    if not p.exists():
        raise ConfigError(f"{s!r} is neither a zoo model nor a file")
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"bad model JSON: {e}") from e
    return model_from_json(obj, obj.get("name") or p.stem)
