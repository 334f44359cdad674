import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import full_penalized, random_edges
from rbpart.graph import NO_FIXED, CapacityBound, FixedAssignment, InputError, WeightedGraph, build_laplacian
from rbpart.model import binary_roundtrip, eliminate_and_penalize
from rbpart.rounding import (
    AugmentationExhausted,
    RoundingConfig,
    round_against,
    round_and_select,
    sample_hyperplanes,
)

EDGE = WeightedGraph.from_edges(2, [(0, 1, 1.0)])


# --- hyperplanes -----------------------------------------------------------------


def test_hyperplanes_are_unit_normals():
    beta = sample_hyperplanes(500, seed=3)
    assert beta.shape == (2, 500)
    np.testing.assert_allclose(np.linalg.norm(beta, axis=0), 1.0, atol=1e-12)


def test_hyperplanes_deterministic():
    assert sample_hyperplanes(50, 9).tobytes() == sample_hyperplanes(50, 9).tobytes()
    with pytest.raises(InputError):
        sample_hyperplanes(0, 1)


def test_hyperplane_angles_uniform():
    beta = sample_hyperplanes(10_000, seed=11)
    gamma = np.mod(np.arctan2(beta[1], beta[0]), 2 * np.pi)
    sigma = (2 * np.pi) / np.sqrt(12 * 10_000)
    assert abs(gamma.mean() - np.pi) <= 3 * sigma


def test_round_against_examples():
    y1, y2 = round_against(np.array([0.0, np.pi]), np.array([1.0, 0.0]))
    assert y1.tolist() == [1, 0] and y2.tolist() == [0, 1]
    # theta - gamma = pi/2: cos is zero up to roundoff, so test the projection rule directly
    y1, _ = round_against(np.array([np.pi / 2]), np.array([1.0, 0.0]))
    assert y1.tolist() == [int(np.cos(np.pi / 2) >= 0)]
    y1, _ = round_against(np.array([0.0]), np.array([0.0, 1.0]))  # exact zero projection
    assert y1.tolist() == [1]


@given(st.integers(0, 10**6))
def test_rotating_hyperplane_by_pi_complements(seed):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, 12)
    gamma = rng.uniform(0, 2 * np.pi)
    a, _ = round_against(theta, np.array([np.cos(gamma), np.sin(gamma)]))
    b, _ = round_against(theta, np.array([np.cos(gamma + np.pi), np.sin(gamma + np.pi)]))
    proj = np.cos(theta - gamma)
    clear = np.abs(proj) > 1e-12
    np.testing.assert_array_equal(a[clear], 1 - b[clear])


# --- selection -------------------------------------------------------------------


def test_two_vertex_ranking_matches_enumeration():
    q = eliminate_and_penalize(build_laplacian(EDGE), NO_FIXED, 5.0)
    values = {bits: full_penalized(2, EDGE.edges(), [v for v in range(2) if bits[v]], 5.0)
              for bits in itertools.product((0, 1), repeat=2)}
    best = min(values, key=values.get)
    assert sorted(values.values())[0] < sorted(values.values())[2]
    theta = np.array([0.0, np.pi])  # every hyperplane yields one of the split assignments
    out = round_and_select(theta, q, EDGE, [[2], [2]], RoundingConfig(planes=20, keep=2))
    assert out.best.cut == 1.0
    assert values[tuple(out.best.y1.tolist())] == values[best]


def test_tight_capacities_return_balanced_split():
    g = WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    q = eliminate_and_penalize(build_laplacian(g), NO_FIXED, 0.0)
    theta = np.array([0.0, 0.1, 0.2, 0.3])  # all together: every candidate is lopsided
    out = round_and_select(theta, q, g, [[2], [2]], RoundingConfig(planes=30, keep=5, seed=1))
    assert out.best.y1.sum() == 2 and out.best.feasible
    assert not out.augmented[0]
    assert out.stage in ("scan", "repair")


def test_impossible_capacities_exhaust():
    q = eliminate_and_penalize(build_laplacian(EDGE), NO_FIXED, 5.0)
    with pytest.raises(AugmentationExhausted) as err:
        round_and_select(np.array([0.0, 1.0]), q, EDGE, [[0], [0]], RoundingConfig(max_augmentations=0))
    assert err.value.best is not None


def test_augmentation_marks_partitions():
    g = WeightedGraph.from_edges(2, [(0, 1, 1.0)], np.array([[2], [2]]))
    q = eliminate_and_penalize(build_laplacian(g), NO_FIXED, 5.0)
    out = round_and_select(np.array([0.0, np.pi]), q, g, CapacityBound([[1], [1]]), RoundingConfig())
    assert all(out.augmented) and out.augmentations >= 1
    assert np.all(out.capacities >= 2)
    assert out.overflow[0] == (True, True)


def test_config_validation():
    with pytest.raises(ValueError):
        RoundingConfig(planes=5, keep=6)
    with pytest.raises(ValueError):
        RoundingConfig(augmentation_factor=1.0)


@st.composite
def rounding_instances(draw):
    n = draw(st.integers(2, 12))
    seed = draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    B = rng.integers(1, 10, size=(n, 1))
    g = WeightedGraph.from_edges(n, random_edges(rng, n, 0.5), B)
    k = draw(st.integers(0, min(3, n - 1)))
    verts = rng.permutation(n)[:k]
    fixed = FixedAssignment(verts[: k // 2 + k % 2], verts[k // 2 + k % 2 :])
    q = eliminate_and_penalize(build_laplacian(g), fixed, draw(st.sampled_from([0.0, 5.0])))
    theta = rng.uniform(0, 2 * np.pi, q.dim)
    cap = int(np.ceil(B.sum() * draw(st.sampled_from([0.5, 0.6, 1.0]))))
    return g, fixed, q, theta, np.array([[cap], [cap]]), seed


@given(rounding_instances())
def test_rounding_invariants(data):
    g, fixed, q, theta, U, seed = data
    cfg = RoundingConfig(planes=40, keep=5, seed=seed)
    try:
        out = round_and_select(theta, q, g, U, cfg)
    except AugmentationExhausted:
        return
    B = g.vertex_weights
    assert out.objective_values == sorted(out.objective_values)
    for part, value, augmented in zip(out.partitions, out.objective_values, out.augmented):
        np.testing.assert_array_equal(part.y1 + part.y2, np.ones(g.n))
        assert all(part.y1[v] == 1 for v in fixed.f1) and all(part.y2[v] == 1 for v in fixed.f2)
        assert value == pytest.approx(binary_roundtrip(q, part.y1[q.free_vertices]), abs=1e-9)
        limit = out.capacities if augmented else U
        assert part.y1 @ B <= limit[0] and part.y2 @ B <= limit[1]
    again = round_and_select(theta, q, g, U, cfg)
    assert [p.y1.tolist() for p in again.partitions] == [p.y1.tolist() for p in out.partitions]
    assert again.objective_values == out.objective_values
