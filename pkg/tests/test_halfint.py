from fractions import Fraction

import numpy as np
import pytest
from conftest import half_layers
from hypothesis import given

from matround.halfint import (
    ColorPolicy,
    HalfLayer,
    _round_scan,
    _round_vectorized,
    build_aux_graph,
    round_half_layer,
)


def prefix_errors(twice, y):
    diff = twice.astype(np.int64) - 2 * y.astype(np.int64)  # doubled errors
    return np.cumsum(diff, axis=1), np.cumsum(diff, axis=0)


def test_checkerboard():
    x = HalfLayer.from_values([[Fraction(1, 2)] * 2] * 2)
    assert round_half_layer(x).tolist() == [[0, 1], [1, 0]]


def test_single_row():
    x = HalfLayer.from_values([[Fraction(1, 2)] * 4])
    assert round_half_layer(x).tolist() == [[0, 1, 0, 1]]


def test_four_cycle_graph():
    g = build_aux_graph(np.full((2, 2), 1, dtype=np.int8))
    assert g.num_vertices == 4
    assert g.num_components == 1
    assert len(g.edges()) == 4
    assert bool(g.cyclic[0])


def test_rejects_bad_entries():
    with pytest.raises(ValueError):
        HalfLayer(np.array([[3]], dtype=np.int8))


@given(half_layers())
def test_half_bound(twice):
    y = round_half_layer(twice)
    rows, cols = prefix_errors(twice, y)
    assert np.abs(rows).max() <= 1 and np.abs(cols).max() <= 1
    assert set(np.unique(y)) <= {0, 1}
    assert ((twice != 2) | (y == 1)).all() and ((twice != 0) | (y == 0)).all()


@given(half_layers())
def test_pairs_cancel(twice):
    # each row pair and column pair rounds one up and one down
    y = round_half_layer(twice)
    g = build_aux_graph(twice)
    for a, b, _ in g.edges():
        ya = y[g.rows[a], g.cols[a]]
        yb = y[g.rows[b], g.cols[b]]
        assert ya + yb == 1


@given(half_layers(max_side=12))
def test_scan_matches_vectorized(twice):
    m, n = twice.shape
    scan = np.array(_round_scan(twice.tolist(), m, n, ColorPolicy.canonical()), dtype=np.int8)
    assert (scan == _round_vectorized(twice, ColorPolicy.canonical())).all()
    seed = int(twice.sum())
    a = np.array(_round_scan(twice.tolist(), m, n, ColorPolicy.randomized(seed)), dtype=np.int8)
    b = _round_vectorized(twice, ColorPolicy.randomized(seed))
    assert (a == b).all()


@given(half_layers())
def test_even_counts_give_cycles(twice):
    # force even 1/2-counts per line by clearing odd leftovers greedily
    t = twice.copy()
    t[t == 1] = 0
    t[: (t.shape[0] // 2) * 2, : (t.shape[1] // 2) * 2] = 1
    g = build_aux_graph(t)
    if g.num_vertices:
        assert g.cyclic.all()
        assert (g.component_sizes() % 2 == 0).all()


def test_randomized_frequencies():
    twice = np.array([[1, 1, 0], [1, 1, 2]], dtype=np.int8)
    policy = ColorPolicy.randomized(5)
    trials = 4000
    ups = sum(round_half_layer(twice, policy).astype(np.int64) for _ in range(trials))
    rate = ups / trials
    tol = 4 * np.sqrt(0.25 / trials)
    assert np.abs(rate[twice == 1] - 0.5).max() < tol
    assert (rate[twice == 2] == 1).all() and (rate[twice == 0] == 0).all()


def test_canonical_anchor_down():
    twice = np.array([[0, 1, 1], [1, 0, 1]], dtype=np.int8)
    g = build_aux_graph(twice)
    y = round_half_layer(twice)
    for a in g.anchors:
        assert y[g.rows[a], g.cols[a]] == 0
