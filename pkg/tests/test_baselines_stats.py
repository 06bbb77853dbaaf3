import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inc_powerlaw.baselines_stats import (
    Enumeration,
    EnumerationGuardError,
    SampleOutsideEnumeration,
    canonical,
    chi_square_p,
    chi_square_uniformity,
    edge_switch,
    enumerate_graphs,
    havel_hakimi,
)
from inc_powerlaw.degree_model import check_graphical
from inc_powerlaw.rng import RunRng

import oracles as O


@pytest.mark.parametrize("d,count", [((2, 2, 2), 1), ((1, 1, 1, 1), 3), ((2, 2, 2, 2), 3), ((3, 3, 1, 1), 0)])
def test_enumeration_counts(d, count):
    assert enumerate_graphs(d).count == count


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=6))
def test_enumeration_matches_subset_oracle(raw):
    d = tuple(sorted(raw, reverse=True))
    enum = enumerate_graphs(d)
    assert set(enum.graphs) == O.all_simple_graphs(d)
    assert len(set(enum.graphs)) == enum.count
    assert enumerate_graphs(d).graphs == enum.graphs  # idempotent


def test_enumeration_guard():
    with pytest.raises(EnumerationGuardError):
        enumerate_graphs((1,) * 12)
    with pytest.raises(EnumerationGuardError):
        enumerate_graphs((5,) * 6)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=2, max_size=14))
def test_havel_hakimi_realizes_graphical_sequences(raw):
    d = sorted(raw, reverse=True)
    if sum(d) % 2 or not check_graphical(d):
        return
    edges = havel_hakimi(d)
    deg = [0] * len(d)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    assert deg == d and len(set(map(tuple, edges))) == len(edges)


def test_edge_switch_zero_swaps_is_identity():
    start = havel_hakimi((2, 2, 2, 2))
    assert canonical(edge_switch(start, 0, RunRng(1))) == canonical(start)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_edge_switch_preserves_degrees_and_simplicity(seed):
    gen = np.random.default_rng(seed)
    drawn = None
    while drawn is None:
        drawn = O.planted_multigraph(gen, int(gen.integers(4, 25)), float(gen.uniform(0.1, 0.6)))
    d, g = drawn
    out = edge_switch([tuple(e) for e in g.edge_array().tolist()], 5, RunRng(seed))
    deg = [0] * d.n
    for u, v in out:
        assert u != v
        deg[u] += 1
        deg[v] += 1
    assert deg == list(d.degrees) and len(set(out)) == len(out)


def test_chi_square_examples():
    enum = enumerate_graphs((1, 1, 1, 1))
    balanced = [g for g in enum.graphs for _ in range(10)]
    r = chi_square_uniformity(balanced, enum)
    assert r.statistic == 0 and r.p_value == 1.0 and r.dof == 2
    r = chi_square_uniformity(balanced[:20], Enumeration((1, 1, 1, 1), enum.graphs[:2]))
    assert r.statistic == 0 and r.dof == 1
    with pytest.raises(SampleOutsideEnumeration):
        chi_square_uniformity([((0, 1), (0, 2))], enum)


def test_chi_square_p_against_closed_form():
    # one degree of freedom: survival function is erfc(sqrt(x / 2))
    assert chi_square_p(3.84, 1) == pytest.approx(0.050, abs=0.001)
    for x in (0.5, 2.0, 7.3):
        assert chi_square_p(x, 1) == pytest.approx(math.erfc(math.sqrt(x / 2)), rel=1e-9)
        # two degrees of freedom: exp(-x / 2)
        assert chi_square_p(x, 2) == pytest.approx(math.exp(-x / 2), rel=1e-9)
    assert chi_square_p(5.0, 0) == 1.0


def test_report_formats():
    enum = enumerate_graphs((2, 2, 2, 2))
    r = chi_square_uniformity(list(enum.graphs) * 3, enum)
    assert "p_value" in r.to_text()
    assert r.to_csv().splitlines()[0] == "category,observed,expected"
