import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from inc_powerlaw.degree_model import DegreeSequence, DegreeSequenceError, compute_stats, sample_powerlaw_sequence
from inc_powerlaw.multigraph import Multigraph
from inc_powerlaw.pipeline import (
    AttemptsExhausted,
    RunConfig,
    RunStats,
    check_preconditions_12_map,
    check_preconditions_345,
    generate,
    parallel_generate,
    phase3,
)
from inc_powerlaw.rng import RunRng, run_seed


def degrees_of(g):
    deg = [0] * g.n
    for u, v in g.pairs():
        deg[u] += 1
        deg[v] += 1
    return deg


def test_single_edge_fast_path():
    g, rs = generate(DegreeSequence((1, 1)), RunConfig(master_seed=3))
    assert g.edge_set() == ((0, 1),)
    assert rs.attempts == 1 and rs.accepted_index == 0


def test_triangle_is_unique_output():
    for k in range(50):
        g, _ = generate(DegreeSequence((2, 2, 2)), RunConfig(master_seed=k))
        assert g.edge_set() == ((0, 1), (0, 2), (1, 2))


def test_four_cycles_uniform():
    d = DegreeSequence((2, 2, 2, 2))
    seen = {}
    for k in range(6000):
        g, _ = generate(d, RunConfig(master_seed=run_seed(40, k)))
        seen[g.edge_set()] = seen.get(g.edge_set(), 0) + 1
    assert len(seen) == 3
    assert chisquare(list(seen.values())).pvalue >= 0.001


def test_rejects_bad_sequences():
    with pytest.raises(DegreeSequenceError, match="odd"):
        generate(DegreeSequence((2, 1)))
    with pytest.raises(DegreeSequenceError, match="k=2"):
        generate(DegreeSequence((3, 3, 1, 1)))


def test_attempt_cap():
    with pytest.raises(AttemptsExhausted):
        generate(DegreeSequence((2, 2, 2, 2)), RunConfig(max_attempts=0))


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([2.88, 3.0, 3.5]))
def test_outputs_are_simple_with_right_degrees(seed, gamma):
    d = sample_powerlaw_sequence(1500, gamma, 1, np.random.default_rng(seed))
    g, rs = generate(d, RunConfig(master_seed=seed, gamma=gamma, max_attempts=400))
    assert g.is_simple()
    assert degrees_of(g) == list(d.degrees)
    assert rs.accepted_index == rs.attempts - 1


def test_same_seed_same_graph():
    d = sample_powerlaw_sequence(3000, 2.9, 1, np.random.default_rng(5))
    a, _ = generate(d, RunConfig(master_seed=77, gamma=2.9))
    b, _ = generate(d, RunConfig(master_seed=77, gamma=2.9))
    assert np.array_equal(a.edge_array(), b.edge_array())


def test_parallel_one_is_sequential():
    d = sample_powerlaw_sequence(2000, 2.9, 1, np.random.default_rng(6))
    a, ra = generate(d, RunConfig(master_seed=8, gamma=2.9))
    b, rb = parallel_generate(d, RunConfig(master_seed=8, gamma=2.9, parallel_runs=1))
    assert np.array_equal(a.edge_array(), b.edge_array()) and ra.accepted_index == rb.accepted_index


def test_parallel_matches_sequential():
    d = sample_powerlaw_sequence(2000, 2.9, 1, np.random.default_rng(7))
    a, ra = generate(d, RunConfig(master_seed=9, gamma=2.9))
    b, rb = generate(d, RunConfig(master_seed=9, gamma=2.9, parallel_runs=4))
    assert np.array_equal(a.edge_array(), b.edge_array())
    assert ra.accepted_index == rb.accepted_index and ra.attempts == rb.attempts


def test_preconditions_345():
    d = DegreeSequence((4, 4, 2, 2, 2, 2))
    stats = compute_stats(d, 2.9, h=0)
    simple = Multigraph.build(d, [(0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (1, 3), (1, 4), (1, 5)])
    assert check_preconditions_345(simple, stats)
    quad = Multigraph.build(d, [(0, 1)] * 4 + [(2, 3), (4, 5), (2, 4), (3, 5)])
    assert not check_preconditions_345(quad, stats)


def test_preconditions_345_double_bound_is_inclusive():
    d = DegreeSequence((2, 2, 2, 2, 1, 1))
    g = Multigraph.build(d, [(0, 1), (0, 1), (2, 3), (2, 4), (3, 5)])
    assert g.m_d == 1
    stats = compute_stats(d, 2.9, h=0)
    # m_d M_1^2 <= 4 L_2 M_2 holds with equality for M_1 = 2, L_2 = M_2 = 1
    at = dataclasses.replace(stats, M=(0, 2, 1, *stats.M[3:]), L=(0, 2, 1, *stats.L[3:]))
    assert check_preconditions_345(g, at)
    over = dataclasses.replace(at, M=(0, 3, 1, *stats.M[3:]))
    assert not check_preconditions_345(g, over)


def test_preconditions_12():
    d = DegreeSequence((6, 6, 6) + (1,) * 2000)
    stats = compute_stats(d, 2.9, h=3)
    assert check_preconditions_12_map({}, 3, d, stats)
    # two triples at node 0: m W = 9 is far above eta d_0 for this sequence
    assert not check_preconditions_12_map({(0, 1): 3, (0, 2): 3}, 3, d, stats)


def test_phase3_noop_without_loops():
    d = DegreeSequence((2, 2, 2))
    g = Multigraph.build(d, [(0, 1), (1, 2), (0, 2)])
    rs = RunStats()
    phase3(g, compute_stats(d, 2.9, h=0), RunRng(0), rs)
    assert not rs.switchings


def test_run_stats_serialisation():
    _, rs = generate(DegreeSequence((2, 2, 2, 2)), RunConfig(master_seed=2))
    kv = rs.to_kv()
    assert kv.startswith("attempts=") and "switching_steps=" in kv
    assert rs.to_csv().splitlines()[0] == "key,value"
