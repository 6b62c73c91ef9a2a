import numpy as np
import pytest

from isingmix import ComponentParams, site_conditionals
from isingmix.synthetic import (assignment_accuracy, disjoint_edge_sets, planted_block,
                                planted_mixture, planted_potts, top_edge_tp)


def test_planted_block_is_zero_sum():
    B = planted_block(4, 1.2)
    assert np.allclose(B.sum(axis=0), 0) and np.allclose(B.sum(axis=1), 0)
    assert B[0, 0] == pytest.approx(1.2) and B[0, 1] == pytest.approx(-0.4)


@pytest.mark.parametrize("matching", [False, True])
def test_edge_sets_are_disjoint(matching):
    sets = disjoint_edge_sets(15, 7, 2, seed=3, matching=matching)
    assert [len(s) for s in sets] == [7, 7]
    assert not set(sets[0]) & set(sets[1])
    for s in sets:
        assert all(0 <= i < j < 15 for i, j in s)
        if matching:
            sites = [v for e in s for v in e]
            assert len(sites) == len(set(sites))


def test_matching_needs_enough_sites():
    with pytest.raises(ValueError):
        disjoint_edge_sets(10, 6, 1, matching=True)


def test_planted_potts_fields_prefer_one_state():
    p = planted_potts(6, 3, [(0, 1)], 1.0, field=2.0, seed=1)
    h = p.field_table()
    assert np.allclose(h.sum(axis=1), 0)
    assert np.allclose(np.sort(h, axis=1)[:, -1] - np.sort(h, axis=1)[:, 0], 2.0)
    assert np.allclose(p.coupling_block(0, 1), planted_block(3, 1.0))
    assert not np.any(p.coupling_block(2, 3))


def test_planted_mixture_shapes_and_determinism():
    a = planted_mixture(0, N=10, n_edges=3, per_component=50)
    b = planted_mixture(0, N=10, n_edges=3, per_component=50)
    assert a.data == b.data
    assert (a.data.B, a.data.N, a.data.q) == (100, 10, 3)
    assert a.labels.tolist() == [0] * 50 + [1] * 50
    assert len(a.edges) == 2


def test_assignment_accuracy_is_label_free():
    labels = np.array([0, 0, 1, 1, 1])
    gamma = np.eye(2)[[1, 1, 0, 0, 1]]
    acc, perm = assignment_accuracy(gamma, labels)
    assert acc == pytest.approx(0.8)
    assert perm == (1, 0)


def test_top_edge_tp_of_generating_model():
    edges = [(0, 5), (2, 9), (4, 7)]
    p = planted_potts(10, 3, edges, 1.0, seed=0)
    assert top_edge_tp(p, edges) == 1.0
    assert top_edge_tp(ComponentParams.zeros(10, 3), edges) <= 1.0


def test_planted_edges_drive_conditionals():
    p = planted_potts(4, 3, [(0, 1)], 3.0, field=0.0)
    x = np.array([0, 2, 0, 0])
    assert np.argmax(site_conditionals(x, 0, p)) == 2
