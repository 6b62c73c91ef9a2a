import numpy as np
import pytest
from hypothesis import given, strategies as st

from isingmix import ComponentParams, Dataset, site_conditionals
from isingmix.dca import (AMINO_ACIDS, ContactMap, apc, coupling_scores, frobenius_scores,
                          ranked_pairs, read_msa, tp_rate_curve, write_msa, zero_sum_gauge)
from isingmix.errors import FormatError, InvalidInputError
from oracles import random_component


def test_read_msa_mapping():
    d = read_msa(">a\n-A\n>b\nY-\n")
    assert d.q == 21
    assert d.states.tolist() == [[0, 1], [20, 0]]


def test_unknown_symbols_and_case():
    d = read_msa(">a\nAxc.\n>b\nBZ*w\n")
    assert d.states.tolist() == [[1, 0, 2, 0], [0, 0, 0, 19]]


def test_alphabet_order():
    d = read_msa(">s\n" + AMINO_ACIDS + "\n")
    assert d.states[0].tolist() == list(range(1, 21))


def test_multiline_records():
    assert read_msa(">a\nAC\nDE\n>b\nFGHI\n").states.shape == (2, 4)


def test_ragged_alignment_names_record():
    with pytest.raises(FormatError, match="seq_two"):
        read_msa(">seq_one\nACD\n>seq_two\nAC\n")


@pytest.mark.parametrize("text", ["", "\n\n", ">only\n"])
def test_empty_alignment(text):
    with pytest.raises(FormatError):
        read_msa(text)


def test_sequence_before_header():
    with pytest.raises(FormatError):
        read_msa("ACD\n>a\nACD\n")


@pytest.mark.invariant
@given(seed=st.integers(0, 2 ** 32 - 1), B=st.integers(1, 10), N=st.integers(1, 30))
def test_msa_round_trip(seed, B, N):
    d = Dataset(np.random.default_rng(seed).integers(0, 21, (B, N)), 21)
    assert read_msa(write_msa(d)) == d


def test_write_msa_requires_protein_alphabet():
    with pytest.raises(InvalidInputError):
        write_msa(Dataset(np.zeros((2, 3), int)))


# -- scores ----------------------------------------------------------------------------

def test_zero_model_scores():
    S = coupling_scores(ComponentParams.zeros(6, 3))
    assert np.array_equal(S, np.zeros((6, 6)))


def test_single_block_is_top_pair():
    block = np.array([[1.0, -0.5, 0.2], [0.0, 0.8, -0.3], [0.4, 0.1, -1.0]])
    p = ComponentParams.potts(np.zeros((4, 3)), {(0, 1): block})
    S = coupling_scores(p)
    i, j = ranked_pairs(S, min_sep=0)
    assert (i[0], j[0]) == (0, 1)
    assert S[0, 1] > np.max(np.delete(S[np.triu_indices(4, 1)], 0))


def test_scores_are_symmetric_with_zero_diagonal():
    p, _ = random_component(np.random.default_rng(2), 7, 3)
    S = coupling_scores(p)
    assert np.array_equal(S, S.T)
    assert np.all(np.diag(S) == 0.0)


def test_ising_scores_are_scaled_couplings():
    # for q=2 the Potts block is J*[[1,-1],[-1,1]], Frobenius norm 2|J|
    rng = np.random.default_rng(1)
    J = np.triu(rng.normal(size=(5, 5)), 1)
    F = frobenius_scores(ComponentParams.ising(np.zeros(5), J))
    assert np.allclose(F, 2 * np.abs(J + J.T), atol=1e-12)


@pytest.mark.invariant
@given(seed=st.integers(0, 2 ** 32 - 1), q=st.sampled_from([3, 4, 21]))
def test_gauge_invariance(seed, q):
    rng = np.random.default_rng(seed)
    N = 4 if q < 21 else 3
    p, _ = random_component(rng, N, q)
    g = zero_sum_gauge(p)
    J = g.coupling_tensor()
    assert np.max(np.abs(J.sum(axis=2))) <= 1e-10
    assert np.max(np.abs(J.sum(axis=3))) <= 1e-10
    for x in rng.integers(0, q, (3, N)):
        for n in range(N):
            assert np.allclose(site_conditionals(x, n, g), site_conditionals(x, n, p), atol=1e-12)


@pytest.mark.invariant
@given(seed=st.integers(0, 2 ** 32 - 1), c=st.floats(0.01, 100))
def test_apc_scales_linearly(seed, c):
    F = np.random.default_rng(seed).uniform(0, 1, (8, 8))
    F = F + F.T
    np.fill_diagonal(F, 0)
    truth = ContactMap(frozenset({(1, 7), (2, 8), (3, 8)}), 8)
    assert np.allclose(apc(c * F), c * apc(F), rtol=1e-12, atol=1e-12)
    assert tp_rate_curve(apc(c * F), truth) == tp_rate_curve(apc(F), truth)


def test_apc_formula():
    F = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], float)
    rows = np.array([1.5, 2.0, 2.5])
    mean = 2.0
    S = apc(F)
    assert S[0, 1] == pytest.approx(1 - rows[0] * rows[1] / mean)
    assert S[1, 2] == pytest.approx(3 - rows[1] * rows[2] / mean)


# -- TP curves ---------------------------------------------------------------------------

def scores_from(values, N):
    S = np.zeros((N, N))
    for (i, j), v in values.items():
        S[i - 1, j - 1] = S[j - 1, i - 1] = v
    return S


def test_perfect_predictor():
    S = scores_from({(1, 7): 9.0, (2, 9): 8.0, (3, 10): 7.0}, 10)
    curve = tp_rate_curve(S, ContactMap(frozenset({(1, 7), (2, 9), (3, 10)}), 10))
    assert curve[:3] == [(1, 1.0), (2, 1.0), (3, 1.0)]


def test_empty_truth():
    S = np.random.default_rng(0).uniform(size=(9, 9))
    assert all(t == 0.0 for _, t in tp_rate_curve(S + S.T, ContactMap(frozenset(), 9)))


def test_counting():
    S = scores_from({(1, 7): 4.0, (1, 8): 3.0, (2, 8): 2.0, (1, 9): 1.0}, 9)
    truth = ContactMap(frozenset({(1, 7), (1, 8), (1, 9)}), 9)
    assert tp_rate_curve(S, truth)[3] == (4, 0.75)


def test_min_separation_and_ties():
    S = np.ones((6, 6))
    iu, ju = ranked_pairs(S, min_sep=3)
    assert list(zip(iu + 1, ju + 1)) == [(1, 5), (1, 6), (2, 6)]
    assert len(tp_rate_curve(S, ContactMap(frozenset(), 6), min_sep=0)) == 15


def test_size_mismatch():
    with pytest.raises(InvalidInputError):
        tp_rate_curve(np.zeros((5, 5)), ContactMap(frozenset(), 6))
    with pytest.raises(InvalidInputError):
        tp_rate_curve(np.zeros((5, 5)), ContactMap(frozenset(), 5), min_sep=-1)


@pytest.mark.invariant
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_tp_times_rank_is_integer(seed):
    rng = np.random.default_rng(seed)
    S = rng.normal(size=(12, 12))
    pairs = {tuple(sorted(rng.choice(12, 2, replace=False) + 1)) for _ in range(8)}
    for r, t in tp_rate_curve(S + S.T, ContactMap(frozenset(pairs), 12), min_sep=2):
        assert 0.0 <= t <= 1.0
        assert abs(t * r - round(t * r)) <= 1e-9


def test_contact_map_normalises_pairs():
    c = ContactMap(frozenset({(3, 1), (1, 3), (2, 4)}), 4)
    assert len(c) == 2 and (1, 3) in c
    for bad in [(0, 2), (2, 2), (1, 5)]:
        with pytest.raises(InvalidInputError):
            ContactMap(frozenset({bad}), 4)
