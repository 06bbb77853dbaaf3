from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inc_powerlaw.multigraph import (
    HEAVY_MULTI,
    LIGHT_DOUBLE,
    LIGHT_LOOP,
    LIGHT_TRIPLE,
    GraphError,
    Multigraph,
    format_edge_list,
    nonsimple_from_pairs,
    parse_edge_list,
)
from inc_powerlaw.rng import RunRng

import oracles as O

TRIANGLE = [(1, 2), (2, 3), (1, 3)]


def triangle(h=0):
    return Multigraph.build((2, 2, 2), TRIANGLE, h=h, one_based=True)


def test_build_examples():
    g = triangle()
    assert (g.m_l, g.m_t, g.m_d) == (0, 0, 0)
    assert g.two_star_all == 6 and g.is_simple()
    assert g.multiplicity(0, 1) == 1 and g.multiplicity(0, 0) == 0

    dbl = Multigraph.build((2, 2), [(1, 2), (1, 2)], one_based=True)
    assert dbl.m_d == 1 and dbl.s == [0, 0] and dbl.multiplicity(0, 1) == 2
    assert not dbl.is_simple()

    loop = Multigraph.build((2,), [(1, 1)], one_based=True)
    assert loop.m_l == 1 and not loop.is_simple()


def test_build_rejects_degree_mismatch():
    with pytest.raises(GraphError):
        Multigraph.build((2, 2, 1), TRIANGLE, one_based=True)


def test_remove_from_double_makes_single():
    g = Multigraph.build((2, 2), [(1, 2), (1, 2)], one_based=True)
    g.remove_pair(0, 1)
    assert g.m_d == 0 and g.s == [1, 1]
    with pytest.raises(GraphError):
        g.remove_pair(0, 0)


def test_add_then_remove_restores_counters():
    g = triangle()
    before = g.snapshot()
    g.add_pair(0, 1)
    assert g.m_d == 1
    g.remove_pair(0, 1)
    assert g.snapshot() == before


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 4), st.lists(st.tuples(st.booleans(), st.integers(0, 9), st.integers(0, 9)), max_size=40))
def test_counters_match_rescan_under_mutation(seed, h, ops):
    d = O.random_sequence(np.random.default_rng(seed), 10, 10, 4)
    g = O.random_multigraph(d, h, seed)
    for add, u, v in ops:
        if add:
            g.add_pair(u, v)
        elif g.multiplicity(u, v):
            g.remove_pair(u, v)
        else:
            with pytest.raises(GraphError):
                g.remove_pair(u, v)
    assert g.snapshot() == g.rescan()


def test_500_random_mutation_sequences():
    gen = np.random.default_rng(500)
    for k in range(500):
        d = O.random_sequence(gen, 10, 10, 4)
        g = O.random_multigraph(d, int(gen.integers(0, 4)), k)
        for _ in range(25):
            u, v = gen.integers(0, 10, size=2).tolist()
            if gen.random() < 0.5:
                g.add_pair(u, v)
            elif g.multiplicity(u, v):
                g.remove_pair(u, v)
        assert g.snapshot() == g.rescan()
        if k % 50 == 0:
            g.compact()
            assert g.snapshot() == g.rescan()


def test_classification_by_heaviness():
    # nodes 0,1 heavy; a double between them is a heavy multi-edge
    g = Multigraph.build((3, 3, 2, 2, 2), [(0, 1), (0, 1), (0, 2), (1, 3), (2, 4), (3, 4)], h=2)
    assert g.registry[HEAVY_MULTI] and not g.registry[LIGHT_DOUBLE]
    g = Multigraph.build((3, 3, 3, 3), [(2, 3), (2, 3), (2, 3), (0, 1), (0, 1), (0, 1)], h=2)
    assert len(g.registry[LIGHT_TRIPLE]) == 1
    assert g.heavy_multi_edges() == [(0, 1, 3)]


def _freq(draws, counts, p, n):
    sigma = (n * p * (1 - p)) ** 0.5
    return all(abs(c - n * p) <= 3 * sigma for c in counts.values()) and len(counts) == draws


def test_sample_ordered_pair_triangle_uniform():
    g, rng, n = triangle(), RunRng(3), 60_000
    counts = Counter(g.sample_ordered_pair(rng)[:2] for _ in range(n))
    assert _freq(6, counts, 1 / 6, n)


def test_sample_ordered_pair_double_edge():
    g, rng, n = Multigraph.build((2, 2), [(0, 1), (0, 1)]), RunRng(4), 20_000
    counts = Counter(g.sample_ordered_pair(rng)[:2] for _ in range(n))
    assert _freq(2, counts, 1 / 2, n)
    keys = {g.sample_ordered_pair(rng)[2] for _ in range(200)}
    assert keys == {(0, 1, 0), (0, 1, 1)}  # both parallel instances reachable


def test_sample_ordered_pair_empty():
    g = Multigraph.build((0,), [])
    with pytest.raises(GraphError):
        g.sample_ordered_pair(RunRng(0))


def test_sample_registry_item():
    rng = RunRng(5)
    g = Multigraph.build((2, 1, 1), [(0, 0), (1, 2)])
    assert g.sample_registry_item(LIGHT_LOOP, rng) == (0, 0)
    with pytest.raises(GraphError):
        g.sample_registry_item(LIGHT_TRIPLE, rng)
    g = Multigraph.build((2, 2, 2, 2), [(0, 1), (0, 1), (2, 3), (2, 3)])
    n = 20_000
    counts = Counter(g.sample_registry_item(LIGHT_DOUBLE, rng) for _ in range(n))
    assert _freq(2, counts, 1 / 2, n)


def test_sample_ordered_k_star():
    rng = RunRng(6)
    n = 60_000
    counts = Counter()
    g = triangle()
    for _ in range(n):
        c, arms, _ = g.sample_ordered_k_star(2, False, rng)
        counts[(c, *arms)] += 1
    assert _freq(6, counts, 1 / 6, n)
    star = Multigraph.build((3, 1, 1, 1), [(0, 1), (0, 2), (0, 3)])
    counts = Counter(tuple(star.sample_ordered_k_star(3, False, rng)[1]) for _ in range(n))
    assert _freq(6, counts, 1 / 6, n)
    with pytest.raises(GraphError):
        triangle().sample_ordered_k_star(3, False, rng)


def test_heavy_neighbor_count():
    assert all(triangle().heavy_neighbor_count(v) == 0 for v in range(3))
    assert triangle(h=2).heavy_neighbor_count(2) == 2
    loop = Multigraph.build((2,), [(0, 0)], h=1)
    assert loop.heavy_neighbor_count(0) == 0


def test_edge_list_round_trip():
    g = triangle()
    text = format_edge_list(g.n, g.edge_array(), 9)
    assert text.splitlines()[0] == "# nodes=3 pairs=3 seed=9"
    n, edges = parse_edge_list(text)
    assert n == 3 and sorted(edges) == [(0, 1), (0, 2), (1, 2)]


def test_nonsimple_from_pairs():
    us, vs = np.array([0, 0, 1, 2]), np.array([1, 1, 1, 2])
    assert nonsimple_from_pairs(3, us, vs) == {(0, 1): 2, (1, 1): 1, (2, 2): 1}
