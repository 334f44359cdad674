import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import best_bipartition, improving_moves, labels_cut_of, random_edges, usage_of
from rbpart.graph import InputError, WeightedGraph
from rbpart.refine import (
    _PairState,
    improve,
    improve_labels,
    pair_cut,
    pick_random_pair,
    repair_toward_feasibility,
)

P4 = WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])


def caps(*rows):
    return np.array(rows, dtype=np.int64)


# --- improve -------------------------------------------------------------------


def test_p4_interleaved_split_improves_to_halves():
    # two vertices per side: every single move overflows, the swap does not
    res = improve([0, 2], [1, 3], P4, caps([2], [2]), debug=True)
    assert (res.cut_before, res.cut_after) == (3.0, 1.0)
    assert {frozenset(res.part_i.tolist()), frozenset(res.part_j.tolist())} == {frozenset({0, 1}), frozenset({2, 3})}
    assert best_bipartition(4, P4.edges(), P4.vertex_weights, [[2]]) == 1.0


def test_optimal_single_edge_unchanged():
    g = WeightedGraph.from_edges(2, [(0, 1, 1.0)])
    res = improve([0], [1], g, caps([1], [1]))
    assert not res.changed
    assert res.part_i.tolist() == [0] and res.part_j.tolist() == [1]


def test_saturated_capacities_block_everything():
    B = np.array([[1], [2], [4], [8]])
    g = WeightedGraph.from_edges(4, P4.edges(), B)
    res = improve([0, 2], [1, 3], g, caps([5], [10]))
    assert not res.changed and res.cut_after == res.cut_before == 3.0
    assert res.blocked > 0


def test_infeasible_input_rejected():
    with pytest.raises(InputError):
        improve([0, 1, 2], [3], P4, caps([2], [2]))


def test_overlapping_parts_rejected():
    with pytest.raises(InputError):
        improve([0, 1], [1, 2], P4, caps([4], [4]))


def test_vertices_outside_the_pair_stay_put():
    labels = np.array([0, 1, 0, 1, 2, 2])
    g = WeightedGraph.from_edges(6, P4.edges() + [(3, 4, 5.0), (4, 5, 1.0)])
    out, _ = improve_labels(g, labels, 0, 1, caps([2], [2]))
    assert out[4] == 2 and out[5] == 2


@st.composite
def pair_instances(draw):
    n = draw(st.integers(3, 9))
    seed = draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    edges = random_edges(rng, n, draw(st.sampled_from([0.3, 0.6, 1.0])), wmax=9)
    m = draw(st.integers(1, 2))
    B = rng.integers(1, 6, size=(n, m))
    y = rng.integers(0, 2, size=n)
    slack = rng.integers(0, 6, size=(2, m))
    U = np.vstack([usage_of(B, np.flatnonzero(y == 1)), usage_of(B, np.flatnonzero(y == 0))]) + slack
    fixed = [v for v in range(n) if rng.random() < 0.2]
    return n, edges, B, y, U, fixed


@given(pair_instances())
def test_local_optimality_certificate(data):
    n, edges, B, y, U, fixed = data
    g = WeightedGraph.from_edges(n, edges, B)
    res = improve(np.flatnonzero(y == 1), np.flatnonzero(y == 0), g, U, fixed, debug=True)
    labels = [0] * n
    for v in res.part_j:
        labels[v] = 1
    # monotone, fixed vertices untouched, result feasible and certified locally optimal
    assert res.cut_after <= res.cut_before
    assert res.cut_after == pytest.approx(labels_cut_of(edges, labels))
    for v in fixed:
        assert labels[v] == (0 if y[v] == 1 else 1)
    assert np.all(usage_of(B, res.part_i) <= U[0]) and np.all(usage_of(B, res.part_j) <= U[1])
    assert improving_moves(edges, B, labels, 0, 1, {0: U[0], 1: U[1]}, fixed) == []


def test_delta_consistency_over_random_moves():
    rng = np.random.default_rng(42)
    n = 30
    edges = random_edges(rng, n, 0.3)
    g = WeightedGraph.from_edges(n, edges)
    labels = rng.integers(0, 2, size=n)
    state = _PairState(g, labels, 0, 1, caps([n], [n]))
    for _ in range(1000):
        v = int(rng.integers(n))
        before = pair_cut(g, state.labels, 0, 1)
        if state.labels[v] == 0:
            predicted = state.w_i[v] - state.w_j[v]
        else:
            predicted = state.w_j[v] - state.w_i[v]
        state.move(v)
        assert pair_cut(g, state.labels, 0, 1) - before == pytest.approx(predicted, abs=1e-9)
        assert state.pair_cut() == pytest.approx(pair_cut(g, state.labels, 0, 1), abs=1e-9)


# --- repair --------------------------------------------------------------------


def test_repair_single_move():
    B = np.array([[1], [1], [1], [1]])
    g = WeightedGraph.from_edges(4, P4.edges(), B)
    res = repair_toward_feasibility(np.array([1, 1, 1, 0]), g, caps([2], [2]))
    assert res.success and res.steps == 1
    assert res.y1.sum() == 2


def test_repair_needs_swap():
    B = np.array([[1, 1], [0, 1], [1, 3], [3, 0]])
    U = caps([3, 4], [3, 4])
    y1 = np.array([1, 1, 0, 0])
    # oracle side: no single move lowers the overflow, some swap removes it
    def overflow(y):
        return int(sum(np.maximum(usage_of(B, np.flatnonzero(y == s)) - U[k], 0).sum() for k, s in ((0, 1), (1, 0))))

    base = overflow(y1)
    assert base > 0
    assert all(overflow(np.where(np.arange(4) == v, 1 - y1, y1)) >= base for v in range(4))
    g = WeightedGraph.from_edges(4, [(0, 2, 1.0), (1, 3, 1.0)], B)
    res = repair_toward_feasibility(y1, g, U)
    assert res.success and res.steps == 1
    assert res.y1.sum() == 2 and overflow(res.y1) == 0


def test_repair_fails_when_total_exceeds_capacity():
    res = repair_toward_feasibility(np.array([1, 1, 0, 0]), P4, caps([1], [1]))
    assert not res.success and res.violation > 0


def test_repair_respects_immovable():
    res = repair_toward_feasibility(np.array([1, 1, 1, 0]), P4, caps([2], [2]), immovable=[0, 1, 2])
    assert not res.success
    np.testing.assert_array_equal(res.y1, [1, 1, 1, 0])


@given(st.integers(0, 10**6))
def test_repair_never_increases_overflow(seed):
    rng = np.random.default_rng(seed)
    n = 8
    B = rng.integers(1, 5, size=(n, 2))
    g = WeightedGraph.from_edges(n, random_edges(rng, n, 0.5), B)
    U = rng.integers(4, 14, size=(2, 2))
    y1 = rng.integers(0, 2, size=n)

    def overflow(y):
        return int(sum(np.maximum(B[y == s].sum(axis=0) - U[k], 0).sum() for k, s in ((0, 1), (1, 0))))

    res = repair_toward_feasibility(y1, g, U)
    assert overflow(res.y1) <= overflow(y1)
    assert res.success == (overflow(res.y1) == 0)


# --- random pairs ------------------------------------------------------------------


def test_two_parts_always_first_pair():
    assert {pick_random_pair(2, s) for s in range(20)} == {(0, 1)}


def test_pair_uniformity():
    rng = np.random.default_rng(123)
    counts = {}
    for _ in range(3000):
        p = pick_random_pair(3, rng)
        counts[p] = counts.get(p, 0) + 1
    assert set(counts) == set(itertools.combinations(range(3), 2))
    sigma = (3000 * (1 / 3) * (2 / 3)) ** 0.5
    assert all(abs(c - 1000) <= 3 * sigma for c in counts.values())


def test_pair_determinism():
    a = np.random.default_rng(5)
    b = np.random.default_rng(5)
    assert [pick_random_pair(6, a) for _ in range(10)] == [pick_random_pair(6, b) for _ in range(10)]
    with pytest.raises(InputError):
        pick_random_pair(1, 0)
