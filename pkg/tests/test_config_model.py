import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chi2_contingency, chisquare

from inc_powerlaw.config_model import (
    class_signature,
    full_shuffle_pairing,
    half_shuffle_pairing,
    make_urn,
    sample_multigraph,
    sample_pairing,
)
from inc_powerlaw.degree_model import DegreeSequence, DegreeSequenceError
from inc_powerlaw.multigraph import Multigraph
from inc_powerlaw.rng import RunRng, run_seed


def matchings(slots):
    """All perfect matchings of a list of slots (oracle)."""
    if not slots:
        yield []
        return
    a, rest = slots[0], slots[1:]
    for i, b in enumerate(rest):
        for m in matchings(rest[:i] + rest[i + 1 :]):
            yield [(a, b)] + m


def test_single_edge():
    for k in range(20):
        g = sample_multigraph(DegreeSequence((1, 1)), RunRng(k))
        assert g.edge_set() == ((0, 1),)


def test_two_nodes_degree_two():
    n = 30_000
    double = sum(sample_multigraph(DegreeSequence((2, 2)), RunRng(run_seed(2, k))).m_d for k in range(n))
    # three matchings of four slots, two of them give the double edge
    assert chisquare([double, n - double], [2 * n / 3, n / 3]).pvalue >= 0.001


def test_triangle_frequency_matches_matching_enumeration():
    urn = [0, 0, 1, 1, 2, 2]
    all_m = list(matchings(list(range(6))))
    assert len(all_m) == 15
    simple = sum(
        all(urn[a] != urn[b] for a, b in m) and len({tuple(sorted((urn[a], urn[b]))) for a, b in m}) == 3
        for m in all_m
    )
    n = 30_000
    hits = sum(sample_multigraph(DegreeSequence((2, 2, 2)), RunRng(run_seed(3, k))).is_simple() for k in range(n))
    p = simple / 15
    assert chisquare([hits, n - hits], [n * p, n * (1 - p)]).pvalue >= 0.001


def test_half_shuffle_two_entries():
    urn = make_urn(DegreeSequence((1, 1)))
    for k in range(10):
        us, vs = half_shuffle_pairing(urn, RunRng(k))
        assert sorted([int(us[0]), int(vs[0])]) == [0, 1] and len(us) == 1


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=2, max_size=12), st.integers(0, 2**32))
def test_pairings_preserve_degrees(raw, seed):
    if sum(raw) % 2:
        raw[0] += 1
    d = DegreeSequence.from_unsorted(raw)
    urn = make_urn(d)
    for pairing in (half_shuffle_pairing, full_shuffle_pairing):
        us, vs = pairing(urn, RunRng(seed))
        deg = np.bincount(np.concatenate([us, vs]), minlength=d.n)
        assert deg.tolist() == list(d.degrees)


def test_half_shuffle_matches_full_shuffle_on_two_nodes():
    urn = make_urn(DegreeSequence((2, 2)))
    n = 20_000
    rows = []
    for seed, pairing in ((21, half_shuffle_pairing), (22, full_shuffle_pairing)):
        looped = 0
        for k in range(n):
            us, vs = pairing(urn, RunRng(run_seed(seed, k)))
            looped += bool((us == vs).any())
        rows.append([looped, n - looped])
    assert chi2_contingency(rows)[1] >= 0.001


def test_odd_sum_rejected():
    with pytest.raises(DegreeSequenceError):
        sample_pairing(DegreeSequence((1,)), RunRng(0))


def test_class_signature_examples():
    g = Multigraph.build((2, 2, 2), [(0, 1), (1, 2), (0, 2)])
    s = class_signature(g)
    assert s.heavy_profile == () and s.counts == (0, 0, 0)
    g = Multigraph.build((2, 2), [(0, 1), (0, 1)])
    assert class_signature(g).counts == (0, 0, 1)
    g = Multigraph.build((3, 3, 0), [(0, 1)] * 3, h=2)
    assert class_signature(g).heavy_profile == ((0, 1, 3),)
