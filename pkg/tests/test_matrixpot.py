import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from svpressure.errors import BlockMismatch, ConfigError, EmptyWord, Singular, SOutOfRange
from svpressure.matrixpot import (
    Kind,
    MatrixCocycle,
    Orientation,
    PotentialSpec,
    bottom,
    check_domination,
    cocycle_from_json,
    cocycle_product,
    min_norm,
    potential_log,
    singular_values,
    singular_values_batch,
    top,
)
from svpressure.symbolic import full_shift

PHI = (1 + math.sqrt(5)) / 2


def rot(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# -- singular values ---------------------------------------------------------

def test_singular_value_examples():
    assert np.allclose(singular_values(np.eye(3)), [1, 1, 1], atol=1e-15)
    assert np.allclose(singular_values(np.diag([3.0, -2.0])), [3, 2], atol=1e-15)
    assert np.allclose(singular_values(np.array([[1.0, 1.0], [0.0, 1.0]])), [PHI, 1 / PHI], atol=1e-15)


def test_singular_values_zero_matrix():
    assert np.array_equal(singular_values(np.zeros((3, 3))), np.zeros(3))


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8])
def test_jacobi_matches_lapack(d):
    rng = np.random.default_rng(d)
    A = rng.standard_normal((50, d, d))
    ref = np.linalg.svd(A, compute_uv=False)
    assert np.allclose(singular_values_batch(A), ref, rtol=1e-12, atol=1e-14)


def test_min_norm_examples():
    assert min_norm(np.eye(2)) == pytest.approx(1.0, abs=1e-15)
    assert min_norm(np.diag([3.0, 2.0])) == pytest.approx(2.0, abs=1e-15)
    assert min_norm(np.array([[1.0, 1.0], [0.0, 1.0]])) == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-15)
    with pytest.raises(Singular):
        min_norm(np.array([[1.0, 2.0], [2.0, 4.0]]))


# -- products ----------------------------------------------------------------

def test_cocycle_product_examples():
    c = MatrixCocycle(np.array([[[0.0, 1.0], [1.0, 0.0]], [[2.0, 0.0], [0.0, 1.0]]]))
    assert np.array_equal(cocycle_product(c, [1]), c.mats[1])
    assert np.array_equal(cocycle_product(c, [0, 1]), [[0.0, 2.0], [1.0, 0.0]])
    d = MatrixCocycle(np.array([np.diag([2.0, 3.0]), np.diag([5.0, 7.0])]))
    assert np.array_equal(cocycle_product(d, [0, 1]), cocycle_product(d, [1, 0]))
    assert np.array_equal(cocycle_product(d, [0, 1]), np.diag([10.0, 21.0]))
    with pytest.raises(EmptyWord):
        cocycle_product(c, [])


def test_long_products_are_renormalized():
    c = MatrixCocycle(np.array([np.diag([1e3, 300.0])]))
    M, ls = cocycle_product(c, [0] * 200)
    assert np.isfinite(M).all()
    assert potential_log((M, ls), top(1.0)) == pytest.approx(200 * math.log(1e3), rel=1e-12)
    assert potential_log((M, ls), top(2.0)) == pytest.approx(200 * math.log(3e5), rel=1e-12)


# -- potentials --------------------------------------------------------------

def test_potential_examples():
    D = np.diag([3.0, 2.0])
    assert potential_log(D, top(1.5)) == pytest.approx(math.log(3) + 0.5 * math.log(2), abs=1e-15)
    assert potential_log(D, top(1.5)) == pytest.approx(1.445186, abs=1e-6)
    assert potential_log(D, bottom(1.0)) == pytest.approx(math.log(2), abs=1e-15)
    M = np.array([[2.0, 1.0, 0.5], [0.0, -1.0, 3.0], [1.0, 0.0, 1.0]])
    assert potential_log(M, top(3.0)) == pytest.approx(math.log(abs(np.linalg.det(M))), abs=1e-10)


def test_tilde_bottom_example():
    spec = PotentialSpec(Kind.TILDE_BOTTOM, 1.5, 1, ((0,), (1,)))
    assert potential_log(np.diag([4.0, 2.0]), spec) == pytest.approx(math.log(2) + 0.5 * math.log(4), abs=1e-15)


def test_tilde_top_leading_blocks():
    spec = PotentialSpec(Kind.TILDE_TOP, 1.5, 1, ((0,), (1,)))
    assert potential_log(np.diag([2.0, 4.0]), spec) == pytest.approx(math.log(2) + 0.5 * math.log(4), abs=1e-15)


def test_tilde_block_sizes():
    # blocks {0,1} and {2}: s = 2.5 uses the whole first block then half of the second
    M = np.zeros((3, 3))
    M[:2, :2] = [[3.0, 1.0], [0.0, 2.0]]
    M[2, 2] = 5.0
    sv = singular_values(M[:2, :2])
    spec = PotentialSpec(Kind.TILDE_TOP, 2.5, 1, ((0, 1), (2,)))
    assert potential_log(M, spec) == pytest.approx(2 * math.log(sv[0]) + 0.5 * math.log(5), abs=1e-12)


def test_tilde_rejects_non_block_diagonal():
    spec = PotentialSpec(Kind.TILDE_BOTTOM, 1.0, 1, ((0,), (1,)))
    with pytest.raises(BlockMismatch):
        potential_log(np.array([[1.0, 0.1], [0.0, 1.0]]), spec)


def test_spec_validation():
    with pytest.raises(SOutOfRange):
        potential_log(np.eye(2), top(2.5))
    with pytest.raises(ConfigError):
        PotentialSpec(Kind.TOP, 1.0, 1, ((0,), (1,)))
    with pytest.raises(ConfigError):
        PotentialSpec(Kind.TOP, 1.0, 2)


def test_additivity_classification():
    assert top(1, 1).sub_additive and not top(1, 1).super_additive
    assert bottom(1, -1).sub_additive
    assert bottom(1, 1).super_additive and top(1, -1).super_additive


# -- cocycles ----------------------------------------------------------------

def test_cocycle_flags():
    assert MatrixCocycle(np.array([np.diag([2.0, 3.0])])).expanding
    c = MatrixCocycle(np.array([np.diag([0.5, 0.25])]), Orientation.CONTRACTION)
    assert c.contracting and not c.expanding
    with pytest.raises(Singular):
        MatrixCocycle(np.array([[[1.0, 2.0], [2.0, 4.0]]]))


def test_cocycle_json_round_trip():
    c = MatrixCocycle(np.array([np.diag([2.0, 4.0]), np.diag([3.0, 5.0])]), blocks=((0,), (1,)))
    back = cocycle_from_json(c.to_json())
    assert np.array_equal(back.mats, c.mats) and back.blocks == c.blocks
    assert back.orientation == Orientation.DERIVATIVE


def test_domination_examples():
    blocks = ((0,), (1,))
    r = check_domination(MatrixCocycle(np.array([np.diag([2.0, 4.0])])), full_shift(1), blocks, L=6)
    assert r.dominated and r.order == "ascending"
    assert r.gaps[0] == pytest.approx(math.log(2), abs=1e-12)
    r = check_domination(MatrixCocycle(np.array([np.diag([2.0, 2.0])])), full_shift(1), blocks, L=6)
    assert not r.dominated
    mixed = MatrixCocycle(np.array([np.diag([2.0, 4.0]), np.diag([3.0, 5.0])]))
    r = check_domination(mixed, full_shift(2), blocks, L=10)
    assert r.dominated
    assert r.gaps[0] == pytest.approx(min(math.log(2), math.log(5 / 3)), abs=1e-12)


# -- properties ---------------------------------------------------------------

def _invertible(M) -> bool:
    with np.errstate(divide="ignore"):  # exactly singular draws
        return abs(np.linalg.det(M)) > 1e-3


def mats(d):
    return arrays(np.float64, (d, d), elements=st.floats(-3, 3, allow_nan=False)).filter(_invertible)


pair2 = st.tuples(mats(2), mats(2))
pair3 = st.tuples(mats(3), mats(3))


@given(st.one_of(pair2, pair3), st.floats(0, 1))
def test_top_submultiplicative(pair, frac):
    A, B = pair
    s = frac * A.shape[0]
    assert potential_log(A @ B, top(s)) <= potential_log(A, top(s)) + potential_log(B, top(s)) + 1e-9


@given(st.one_of(pair2, pair3), st.floats(0, 1))
def test_bottom_supermultiplicative(pair, frac):
    A, B = pair
    t = frac * A.shape[0]
    assert potential_log(A @ B, bottom(t)) >= potential_log(A, bottom(t)) + potential_log(B, bottom(t)) - 1e-9


@given(mats(3), st.integers(1, 2), st.sampled_from([Kind.TOP, Kind.BOTTOM]))
def test_continuous_across_integer_s(M, m, kind):
    lo = potential_log(M, PotentialSpec(kind, m - 1e-13))
    hi = potential_log(M, PotentialSpec(kind, m + 1e-13))
    at = potential_log(M, PotentialSpec(kind, float(m)))
    assert abs(lo - at) < 1e-10 and abs(hi - at) < 1e-10


@given(st.one_of(mats(2), mats(3)), st.floats(0.01, 100), st.floats(0, 1))
def test_scaling(M, c, frac):
    s = frac * M.shape[0]
    assert potential_log(c * M, top(s)) == pytest.approx(potential_log(M, top(s)) + s * math.log(c), abs=1e-12)


@given(mats(2), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_rotation_invariance(M, a, b):
    sv = singular_values(rot(a) @ M @ rot(b))
    assert np.allclose(sv, singular_values(M), rtol=1e-10, atol=1e-10)


@given(st.one_of(mats(2), mats(3)))
def test_product_is_det(M):
    assert np.prod(singular_values(M)) == pytest.approx(abs(np.linalg.det(M)), rel=1e-8)
