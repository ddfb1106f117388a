import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import (bfs_labels, brute_diameter, brute_isolated_cliques, graph_from_edges, random_instance)
from scatternet import (PointSet, assign_preferences, build_visibility, components, double_sweep_bounds,
                        exact_diameter, find_isolated_cliques, hop_diameter, realize, sample_points,
                        spanning_ratio)
from scatternet.analysis import DISCONNECTED
from scatternet.errors import NotConnected


def random_S(rng, n_max=50):
    coords, r = random_instance(rng, n_max)
    G = build_visibility(PointSet(coords), r)
    c = int(rng.integers(1, 5))
    return coords, r, realize(G, assign_preferences(G, int(rng.integers(2**32))), c)


def test_single_vertex_connected():
    s = components(graph_from_edges(1, []))
    assert s.count == 1 and s.smallest == 1 and s.is_connected


def test_no_edges():
    s = components(graph_from_edges(5, []))
    assert s.count == 5 and s.smallest == 1 and not s.is_connected
    assert s.component_id.tolist() == [0, 1, 2, 3, 4]


def test_components_match_bfs():
    rng = np.random.default_rng(11)
    for _ in range(200):
        _, _, S = random_S(rng)
        s = components(S)
        labels = bfs_labels(S.n, S.edges.tolist())
        assert s.component_id.tolist() == labels
        assert s.count == len(set(labels))
        assert s.sizes.tolist() == sorted(np.bincount(labels)[np.unique(labels)].tolist())


def test_clique_triangle_and_path():
    tri = graph_from_edges(5, [(0, 1), (1, 2), (0, 2), (3, 4)])
    assert [w.vertices for w in find_isolated_cliques(tri, 3)] == [(0, 1, 2)]
    assert [w.vertices for w in find_isolated_cliques(tri, 2)] == [(3, 4)]
    path = graph_from_edges(3, [(0, 1), (1, 2)])
    assert find_isolated_cliques(path, 3) == []


def test_cliques_match_subset_enumeration():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 200:
        _, _, S = random_S(rng, n_max=20)
        edges = S.edges.tolist()
        for k in range(2, min(S.n, 6) + 1):
            found = sorted(w.vertices for w in find_isolated_cliques(S, k))
            assert found == brute_isolated_cliques(S.n, edges, k)
        checked += 1


def test_planted_clique():
    c = 3
    rng = np.random.default_rng(0)
    cluster = 0.5 + rng.uniform(-0.005, 0.005, (c + 1, 2))
    far = rng.random((200, 2))
    far = far[np.linalg.norm(far - 0.5, axis=1) > 0.12][:60]
    G = build_visibility(PointSet(np.vstack([cluster, far])), 0.05)
    # the cluster sees only itself, so S keeps every cluster edge whatever the ranking
    for seed in range(10):
        S = realize(G, assign_preferences(G, seed), c)
        assert (0, 1, 2, 3) in [w.vertices for w in find_isolated_cliques(S, c + 1)]


def test_diameter_small_cases():
    assert hop_diameter(graph_from_edges(2, [(0, 1)])).value == 1
    assert hop_diameter(graph_from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])).value == 4
    hd = hop_diameter(graph_from_edges(4, [(0, 1), (2, 3)]))
    assert hd.value == DISCONNECTED and hd.mode == DISCONNECTED
    assert double_sweep_bounds(graph_from_edges(4, [(0, 1), (2, 3)])) is None


def test_diameter_bounds_bracket_exact():
    rng = np.random.default_rng(13)
    done = 0
    while done < 100:
        n = int(rng.integers(20, 300))
        G = build_visibility(sample_points(n, 2, int(rng.integers(2**32))), float(rng.uniform(0.15, 0.4)))
        S = realize(G, assign_preferences(G, done), int(rng.integers(2, 6)))
        if not components(S).is_connected:
            continue
        exact = exact_diameter(S)
        assert exact == brute_diameter(S.n, S.edges.tolist())
        lo, hi = double_sweep_bounds(S, start=int(rng.integers(n)))
        assert lo <= exact <= hi
        bounded = hop_diameter(S, exact_cutoff=0)
        assert bounded.mode == "bounds" and bounded.lower <= exact <= bounded.upper
        done += 1


def test_spanning_collinear_relay():
    r = 0.3
    pts = np.array([[0.2, 0.5], [0.5, 0.5], [0.8, 0.5]])
    S = graph_from_edges(3, [(0, 1), (1, 2)])
    assert spanning_ratio(S, pts, r * 0.99) == pytest.approx(1.0)


def test_spanning_detour_fixture():
    r = 0.2
    h = 0.4975 * r
    u, v, w = [0.3, 0.5], [0.3 + 1.5 * r, 0.5], [0.3 + 0.75 * r, 0.5 + h]
    S = graph_from_edges(3, [(0, 2), (1, 2)])
    expected = 2 * math.hypot(0.75 * r, h) / (1.5 * r)
    assert expected == pytest.approx(1.2, abs=1e-3)
    assert spanning_ratio(S, np.array([u, v, w]), r) == pytest.approx(expected, rel=1e-12)


def test_spanning_no_eligible_pair_and_disconnected():
    S = graph_from_edges(2, [(0, 1)])
    assert spanning_ratio(S, np.array([[0.1, 0.1], [0.15, 0.1]]), 0.2) == 1.0
    with pytest.raises(NotConnected):
        spanning_ratio(graph_from_edges(2, []), np.array([[0.1, 0.1], [0.15, 0.1]]), 0.2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(60, 400))
def test_spanning_at_least_one_and_sampled_below_exact(seed, n):
    pts = sample_points(n, 2, seed)
    r = 0.3
    G = build_visibility(pts, r)
    S = realize(G, assign_preferences(G, seed), 4)
    if not components(S).is_connected:
        return
    exact = spanning_ratio(S, pts, r)
    sampled = spanning_ratio(S, pts, r, mode="sampled", k_sources=5, seed=seed)
    assert 1.0 <= sampled <= exact
