import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from svpressure.errors import EmptyRowOrColumn, IncompatibleMeasure, NonIrreducible, NonSquare, StateBudgetExceeded
from svpressure.symbolic import (
    LocallyConstantPotential,
    MarkovMeasure,
    additive_pressure,
    bernoulli,
    corrupt_measure,
    count_words,
    enumerate_words,
    full_shift,
    gibbs_check,
    markov_entropy,
    potential_average,
    potential_from_json,
    random_markov_measure,
    recode_power,
    recode_sliding,
    rpf_gibbs,
    sft_from_json,
    spectral_radius,
    topological_entropy,
    validate_sft,
    word_array,
)

PHI = (1 + math.sqrt(5)) / 2


# -- validation and counting -------------------------------------------------

def test_validate_full_and_golden(golden):
    full = validate_sft([[1, 1], [1, 1]])
    assert full.irreducible and full.is_full
    assert golden.irreducible and not golden.is_full


def test_validate_rejects_empty_column():
    with pytest.raises(EmptyRowOrColumn):
        validate_sft([[1, 0], [1, 0]])


def test_validate_rejects_non_square():
    with pytest.raises(NonSquare):
        validate_sft([[1, 1, 0], [1, 1, 1]])


def test_reducible_flag():
    assert not validate_sft([[1, 1], [0, 1]]).irreducible


def test_count_words_examples(golden):
    assert count_words(full_shift(2), 10) == 1024
    assert count_words(golden, 5) == 13
    assert count_words(validate_sft([[1]]), 7) == 1


def test_count_words_no_wraparound():
    # 2^200 does not fit in 64 bits; exact integers must come back
    assert count_words(full_shift(2), 201) == 2**200 * 2


def test_enumerate_words_examples(golden):
    assert list(enumerate_words(golden, 2)) == [(0, 0), (0, 1), (1, 0)]
    assert list(enumerate_words(full_shift(2), 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert list(enumerate_words(validate_sft(np.ones((3, 3))), 1)) == [(0,), (1,), (2,)]


def test_word_array_matches_enumeration(golden):
    for n in range(1, 8):
        assert [tuple(w) for w in word_array(golden, n).tolist()] == list(enumerate_words(golden, n))


def test_entropy_examples(golden):
    assert topological_entropy(full_shift(2)) == pytest.approx(math.log(2), abs=1e-12)
    assert topological_entropy(golden) == pytest.approx(0.481212, abs=1e-6)
    assert topological_entropy(golden) == pytest.approx(math.log(PHI), abs=1e-12)
    assert topological_entropy(validate_sft([[1]])) == 0.0


def test_spectral_radius_periodic_matrix():
    # period-2 structure defeats plain power iteration
    assert spectral_radius(np.array([[0.0, 2.0], [8.0, 0.0]])) == pytest.approx(4.0, rel=1e-12)


def test_spectral_radius_reducible_takes_max_component():
    M = np.array([[2.0, 1.0, 0.0], [0.0, 3.0, 1.0], [0.0, 0.0, 0.5]])
    assert spectral_radius(M) == pytest.approx(3.0, rel=1e-12)


# -- recodings ---------------------------------------------------------------

def test_recode_sliding_examples(golden):
    r = recode_sliding(full_shift(2), 2)
    assert r.k == 4 and np.all(r.dense.sum(axis=1) == 2)
    g2 = recode_sliding(golden, 2)
    assert g2.labels == ((0, 0), (0, 1), (1, 0))
    edges = {(g2.labels[i], g2.labels[j]) for i, j in zip(*np.nonzero(g2.dense))}
    assert edges == {((0, 0), (0, 0)), ((0, 0), (0, 1)), ((0, 1), (1, 0)), ((1, 0), (0, 0)), ((1, 0), (0, 1))}
    assert topological_entropy(g2) == pytest.approx(topological_entropy(golden), abs=1e-10)
    one = recode_sliding(golden, 1)
    assert np.array_equal(one.dense, golden.dense)


def test_recode_power_examples(golden):
    r = recode_power(full_shift(2), 3)
    assert r.k == 8 and r.is_full
    g2 = recode_power(golden, 2)
    assert g2.labels == ((0, 0), (0, 1), (1, 0))
    edges = {(g2.labels[i], g2.labels[j]) for i, j in zip(*np.nonzero(g2.dense))}
    # w -> w' iff last(w) may precede first(w')
    want = {(u, v) for u in g2.labels for v in g2.labels if golden.dense[u[-1], v[0]]}
    assert edges == want and len(edges) == 8
    assert topological_entropy(g2) == pytest.approx(2 * topological_entropy(golden), abs=1e-12)
    assert np.array_equal(recode_power(golden, 1).dense, golden.dense)


def test_state_budget_enforced():
    with pytest.raises(StateBudgetExceeded):
        recode_sliding(full_shift(2), 21)


# -- additive pressure and Gibbs measures -----------------------------------

def test_additive_pressure_examples(golden):
    f2 = full_shift(2)
    assert additive_pressure(f2, LocallyConstantPotential.constant(f2, 0.0)) == pytest.approx(math.log(2), abs=1e-12)
    assert additive_pressure(f2, LocallyConstantPotential.constant(f2, -0.3)) == pytest.approx(0.393147, abs=1e-6)
    pot = LocallyConstantPotential.from_dict(golden, 1, {"0": math.log(1 / 2), "1": math.log(1 / 3)})
    # Perron root of [[1/2, 1/2], [1/3, 0]] by the quadratic formula
    rho = (0.5 + math.sqrt(0.25 + 4 * (1 / 6))) / 2
    assert additive_pressure(golden, pot) == pytest.approx(math.log(rho), abs=1e-12)


def test_rpf_gibbs_uniform():
    f2 = full_shift(2)
    res = rpf_gibbs(f2, LocallyConstantPotential.constant(f2, 0.0))
    assert res.pressure == pytest.approx(math.log(2), abs=1e-12)
    assert np.allclose(res.measure.dense_P(), 0.5, atol=1e-12)
    assert res.gibbs_constant == pytest.approx(1.0, abs=1e-12)


def test_rpf_gibbs_normalized_potential():
    f2 = full_shift(2)
    pot = LocallyConstantPotential.from_dict(f2, 1, {"0": math.log(0.3), "1": math.log(0.7)})
    res = rpf_gibbs(f2, pot)
    assert res.pressure == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(res.measure.pi, [0.3, 0.7], atol=1e-12)
    assert np.allclose(res.measure.dense_P(), [[0.3, 0.7], [0.3, 0.7]], atol=1e-12)
    assert res.gibbs_constant == pytest.approx(1.0, abs=1e-12)


def test_golden_mme_gibbs_constant_is_sqrt5(golden):
    # the cylinder [1] has ratio pi_1 * phi = 1/sqrt(5), so no constant
    # below sqrt(5) can work
    pot = LocallyConstantPotential.constant(golden, 0.0)
    res = rpf_gibbs(golden, pot)
    assert res.gibbs_constant == pytest.approx(math.sqrt(5), rel=1e-12)
    assert res.measure.pi[1] * PHI == pytest.approx(1 / math.sqrt(5), rel=1e-12)
    rep = gibbs_check(golden, pot, res, max_len=12)
    assert rep.passed
    assert rep.worst_ratio_low == pytest.approx(1 / math.sqrt(5), rel=1e-10)


def test_gibbs_check_depth2_potential(golden):
    pot = LocallyConstantPotential.from_dict(golden, 2, {"00": 0.3, "01": -1.0, "10": 0.5})
    res = rpf_gibbs(golden, pot)
    assert res.measure.labels == ((0, 0), (0, 1), (1, 0))
    assert gibbs_check(golden, pot, res, max_len=12).passed


def test_gibbs_check_catches_corruption():
    f2 = full_shift(2)
    pot = LocallyConstantPotential.from_dict(f2, 1, {"0": math.log(0.3), "1": math.log(0.7)})
    res = rpf_gibbs(f2, pot)
    bad = res._replace(measure=corrupt_measure(res.measure, 1.5))
    rep = gibbs_check(f2, pot, bad, max_len=8)
    assert not rep.passed
    assert len(rep.worst_cylinder) >= 1


def test_rpf_gibbs_needs_irreducible():
    sft = validate_sft([[1, 1], [0, 1]])
    with pytest.raises(NonIrreducible):
        rpf_gibbs(sft, LocallyConstantPotential.constant(sft, 0.0))


# -- Markov measures ---------------------------------------------------------

def test_markov_entropy_examples():
    assert markov_entropy(bernoulli([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-15)
    cycle = MarkovMeasure(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([0.5, 0.5]))
    assert markov_entropy(cycle) == 0.0
    assert markov_entropy(bernoulli([0.3, 0.7])) == pytest.approx(0.610864, abs=1e-6)


def test_markov_measure_validation():
    with pytest.raises(IncompatibleMeasure):
        MarkovMeasure(np.array([[0.5, 0.4], [0.5, 0.5]]), np.array([0.5, 0.5]))
    with pytest.raises(IncompatibleMeasure):
        MarkovMeasure(np.array([[0.9, 0.1], [0.5, 0.5]]), np.array([0.5, 0.5]))


def test_json_round_trip(golden):
    assert np.array_equal(sft_from_json(golden.to_json()).dense, golden.dense)
    pot = LocallyConstantPotential.from_dict(golden, 2, {"00": 0.3, "01": -1.0, "10": 0.5})
    back = potential_from_json(golden, pot.to_json())
    assert np.array_equal(back.values, pot.values)


# -- properties ---------------------------------------------------------------

transition_matrices = st.integers(2, 4).flatmap(
    lambda k: st.lists(st.lists(st.integers(0, 1), min_size=k, max_size=k), min_size=k, max_size=k)
).map(np.array).filter(lambda T: T.sum(axis=0).all() and T.sum(axis=1).all())


@given(transition_matrices, st.integers(1, 6), st.integers(1, 6))
def test_count_words_submultiplicative(T, n, m):
    sft = validate_sft(T)
    assert count_words(sft, n + m) <= count_words(sft, n) * count_words(sft, m)


@given(transition_matrices, st.integers(1, 4))
def test_recodings_preserve_entropy(T, n):
    sft = validate_sft(T)
    h = topological_entropy(sft)
    assert topological_entropy(recode_sliding(sft, n)) == pytest.approx(h, abs=1e-10)
    assert topological_entropy(recode_power(sft, n)) == pytest.approx(n * h, abs=1e-9)


@given(transition_matrices)
def test_zero_potential_pressure_is_entropy(T):
    sft = validate_sft(T)
    p = additive_pressure(sft, LocallyConstantPotential.constant(sft, 0.0))
    assert p == pytest.approx(topological_entropy(sft), abs=1e-12)


@given(transition_matrices.filter(lambda T: validate_sft(T).irreducible), st.integers(0, 2**32 - 1), st.integers(1, 2))
def test_variational_one_sided(T, seed, depth):
    sft = validate_sft(T)
    rng = np.random.default_rng(seed)
    pot = LocallyConstantPotential.from_function(sft, depth, lambda w: rng.normal())
    P = additive_pressure(sft, pot)
    for _ in range(5):
        mu = random_markov_measure(sft, rng)
        assert markov_entropy(mu) + potential_average(mu, pot) <= P + 1e-10
    if depth == 1:
        g = rpf_gibbs(sft, pot).measure
        assert markov_entropy(g) + potential_average(g, pot) == pytest.approx(P, abs=1e-10)


@given(transition_matrices.filter(lambda T: validate_sft(T).irreducible), st.integers(0, 2**32 - 1))
def test_gibbs_inequality_exhaustive(T, seed):
    sft = validate_sft(T)
    rng = np.random.default_rng(seed)
    pot = LocallyConstantPotential.from_function(sft, 1, lambda w: rng.normal())
    res = rpf_gibbs(sft, pot)
    assert gibbs_check(sft, pot, res, max_len=10).passed
