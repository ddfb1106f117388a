import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from scatternet import (PointSet, assign_preferences, build_visibility, components, read_edge_list, realize,
                        realize_staged, sample_points, write_edge_list)
from scatternet.errors import InvalidParameters
from scatternet.irrigation import first_round_size, preference_keys


def _graph(n=400, d=2, r=0.12, seed=1):
    return build_visibility(sample_points(n, d, seed), r)


def test_degree_zero_and_one():
    pts = PointSet(np.array([[0.1, 0.1], [0.9, 0.9], [0.95, 0.9]]))
    prefs = assign_preferences(build_visibility(pts, 0.1), seed=5)
    assert prefs.permutation(0).tolist() == []
    assert prefs.permutation(1).tolist() == [2]
    assert prefs.permutation(2).tolist() == [1]


def test_permutation_is_a_permutation():
    G = _graph()
    prefs = assign_preferences(G, 11)
    for i in range(G.n):
        assert sorted(prefs.permutation(i).tolist()) == G.neighbors(i).tolist()


def test_truncated_table_is_prefix_of_full():
    G = _graph(n=3000, r=0.08)
    full = assign_preferences(G, 3)
    for depth in (1, 2, 5, 17):
        part = assign_preferences(G, 3, depth=depth)
        for i in range(0, G.n, 7):
            k = min(depth, G.degrees[i])
            assert part.permutation(i).tolist() == full.permutation(i)[:k].tolist()


def test_ranking_matches_key_order():
    G = _graph()
    prefs = assign_preferences(G, 99)
    for i in range(0, G.n, 13):
        nb = G.neighbors(i)
        keys = preference_keys(99, np.full(len(nb), i), nb)
        assert prefs.permutation(i).tolist() == nb[np.argsort(keys)].tolist()


def degree3_frequencies(seeds):
    # vertex 0 sees exactly vertices 1, 2, 3
    pts = PointSet(np.array([[0.5, 0.5], [0.55, 0.5], [0.5, 0.55], [0.45, 0.5]]))
    G = build_visibility(pts, 0.06)
    assert G.degrees[0] == 3
    return Counter(tuple(assign_preferences(G, s).permutation(0).tolist()) for s in seeds)


def test_degree3_uniform():
    n = 60_000
    freq = degree3_frequencies(range(n))
    assert len(freq) == 6
    obs = np.array(list(freq.values()))
    assert np.all(np.abs(obs / n - 1 / 6) < 0.01)
    assert stats.chisquare(obs).pvalue > 1e-3


def test_c_at_least_max_degree_gives_G():
    G = _graph()
    prefs = assign_preferences(G, 4)
    full = set(map(tuple, G.edges().tolist()))
    cmax = int(G.degrees.max())
    assert realize(G, prefs, cmax).edge_set() == full
    assert realize(G, prefs, cmax + 10).edge_set() == full


def test_arcs_prefix_no_duplicates():
    G = _graph()
    prefs = assign_preferences(G, 8, depth=4)
    S = realize(G, prefs, 4)
    Gedges = set(map(tuple, G.edges().tolist()))
    assert S.edge_set() <= Gedges
    for i in range(G.n):
        ch = S.chosen(i).tolist()
        assert len(ch) == min(4, G.degrees[i]) == len(set(ch))
        assert ch == prefs.permutation(i)[:4].tolist()


def test_realize_extends_shallow_table():
    G = _graph()
    shallow = assign_preferences(G, 8, depth=2)
    assert realize(G, shallow, 6).edge_set() == realize(G, assign_preferences(G, 8), 6).edge_set()


def test_prefix_inclusion_random_instances():
    rng = np.random.default_rng(5)
    for k in range(100):
        G = build_visibility(sample_points(int(rng.integers(20, 300)), int(rng.integers(1, 4)), k),
                             float(rng.uniform(0.05, 0.4)))
        prefs = assign_preferences(G, k)
        prev = set()
        for c in range(1, 8):
            cur = realize(G, prefs, c).edge_set()
            assert prev <= cur
            prev = cur


def test_invalid_c():
    G = _graph(n=20)
    with pytest.raises(InvalidParameters):
        realize(G, assign_preferences(G, 0), 0)


def enumerate_edge_counts(n, c):
    """Exact distribution of |E| when each vertex of K_n picks a uniform c-subset of the others."""
    choices = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        choices.append([frozenset((min(i, j), max(i, j)) for j in sub) for sub in itertools.combinations(others, c)])
    # pair index per vertex and subset; count the union sizes over all tables by vectorised bitmasks
    pair_id = {p: k for k, p in enumerate(itertools.combinations(range(n), 2))}
    masks = [np.array([sum(1 << pair_id[p] for p in s) for s in ch], dtype=np.int64) for ch in choices]
    acc = np.zeros(1, dtype=np.int64)
    for m in masks:
        acc = (acc[:, None] | m[None, :]).ravel()
    pop = np.zeros(len(acc), dtype=np.int64)
    for b in range(len(pair_id)):
        pop += (acc >> b) & 1
    counts = np.bincount(pop)
    return counts / counts.sum()


def test_complete_graph_edge_count_distribution():
    exact = enumerate_edge_counts(6, 2)
    assert exact.sum() == pytest.approx(1.0)
    G = build_visibility(PointSet(sample_points(6, 2, 1).coords * 0.5), 0.99)
    assert len(G.edges()) == 15
    seeds = 40_000
    emp = np.bincount([len(realize(G, assign_preferences(G, s, depth=2), 2).edges) for s in range(seeds)],
                      minlength=len(exact)) / seeds
    tv = 0.5 * np.abs(emp[:len(exact)] - exact).sum() + 0.5 * emp[len(exact):].sum()
    assert tv <= 0.02


def test_first_round_size():
    n = 10**4
    assert first_round_size(n, 0.1) == math.ceil(math.sqrt(2.05 * math.log(n) / math.log(math.log(n))))


def test_staged_zero_rounds_equals_prefix():
    G = _graph(n=2000, r=0.06)
    c_hat = first_round_size(G.n, 0.1)
    a = realize_staged(G, c_hat, 0.1, 4, seed=21)
    b = realize(G, assign_preferences(G, 21), c_hat)
    assert a.edge_set() == b.edge_set()
    a = realize_staged(G, c_hat + 3, 0.1, 4, seed=21)
    assert a.edge_set() == b.edge_set()


def test_staged_matching_graph():
    xs = [v for k in range(10) for v in (0.1 * k, 0.1 * k + 0.01)]
    G = build_visibility(PointSet(np.array(xs)[:, None]), 0.05)
    assert (G.degrees == 1).all()
    c_hat = first_round_size(G.n, 0.1)
    L = 2
    S = realize_staged(G, c_hat + L, 0.1, L, seed=3)
    assert S.edge_set() == realize(G, assign_preferences(G, 3), 1).edge_set()
    for i in range(G.n):
        assert len(S.chosen(i)) == 1 + L


def test_staged_rejects_small_c():
    G = _graph(n=2000, r=0.06)
    with pytest.raises(InvalidParameters):
        realize_staged(G, 1, 0.1, 4, seed=0)
    with pytest.raises(InvalidParameters):
        realize_staged(G, 10, 0.1, 0, seed=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 9))
def test_staged_subgraph_of_G(seed, extra):
    G = build_visibility(sample_points(300, 2, seed), 0.15)
    c = first_round_size(G.n, 0.1) + extra
    S = realize_staged(G, c, 0.1, 3, seed)
    assert S.edge_set() <= set(map(tuple, G.edges().tolist()))


@pytest.mark.slow
def test_staged_less_connected():
    n, gamma, c, L, trials = 10**4, 6.0, 5, 2, 200
    r = gamma * math.sqrt(math.log(n) / n)
    staged = prefix = 0
    for t in range(trials):
        G = build_visibility(sample_points(n, 2, 1000 + t), r)
        staged += components(realize_staged(G, c, 0.1, L, t)).is_connected
        prefix += components(realize(G, assign_preferences(G, t, depth=c), c)).is_connected
    assert staged / trials <= prefix / trials + 0.05


def test_edge_list_round_trip(tmp_path):
    G = _graph()
    S = realize(G, assign_preferences(G, 2, depth=3), 3)
    path = tmp_path / "e.csv"
    write_edge_list(S, path, {"seed": 2})
    meta, edges = read_edge_list(path)
    assert meta["n"] == G.n and meta["c"] == 3 and meta["seed"] == 2
    assert np.array_equal(edges, S.edges)
