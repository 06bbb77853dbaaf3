"""Configuration-model bootstrap and class signatures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degree_model import DegreeSequence, DegreeSequenceError
from .multigraph import Multigraph


def make_urn(d: DegreeSequence) -> np.ndarray:
    deg = np.asarray(d.degrees, dtype=np.int64)
    if int(deg.sum()) % 2:
        raise DegreeSequenceError("degree sum is odd")
    return np.repeat(np.arange(deg.size, dtype=np.int64), deg)


def full_shuffle_pairing(urn: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    """Reference pairing: shuffle the whole urn and pair neighbouring slots."""
    perm = rng.np.permutation(urn)
    return perm[0::2], perm[1::2]


def half_shuffle_pairing(urn: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    """Pairing that only shuffles the larger half of a random bipartition.

    Each entry goes to side A or B by a fair coin.  The larger side (A on
    ties) is shuffled; its entries beyond position m are appended to the
    smaller side, which keeps its urn order.  The result pairs A'[i] with B'[i].
    """
    size = urn.size
    if size % 2:
        raise DegreeSequenceError("urn size is odd")
    m = size // 2
    coins = rng.np.integers(0, 2, size=size, dtype=np.int8).astype(bool)
    side_a, side_b = urn[coins], urn[~coins]
    if side_a.size >= side_b.size:
        big, small = side_a, side_b
    else:
        big, small = side_b, side_a
    big = rng.np.permutation(big)
    small = np.concatenate([small, big[m:]])
    return big[:m], small


def sample_pairing(d: DegreeSequence, rng, half_shuffle: bool = True):
    urn = make_urn(d)
    if half_shuffle:
        return half_shuffle_pairing(urn, rng)
    return full_shuffle_pairing(urn, rng)


def sample_multigraph(d: DegreeSequence, rng, h: int = 0, half_shuffle: bool = True) -> Multigraph:
    us, vs = sample_pairing(d, rng, half_shuffle)
    return Multigraph(d.degrees, h, us, vs)


@dataclass(frozen=True, order=True)
class ClassSignature:
    heavy_profile: tuple[tuple[int, int, int], ...]
    counts: tuple[int, int, int]  # (m_l, m_t, m_d)


def class_signature(g: Multigraph) -> ClassSignature:
    prof = [(u, v, m) for u, v, m in g.heavy_multi_edges()]
    prof += [(u, u, m) for u, m in g.heavy_loops()]
    return ClassSignature(tuple(sorted(prof)), (g.m_l, g.m_t, g.m_d))


def signature_from_nonsimple(ns: dict, h: int) -> ClassSignature:
    """Signature computed straight from a non-simple map (no graph build)."""
    prof = []
    m_l = m_t = m_d = 0
    for (u, v), m in ns.items():
        if v < h:
            prof.append((u, v, m))
        elif u == v:
            m_l += m == 1
        elif m == 2:
            m_d += 1
        elif m == 3:
            m_t += 1
    return ClassSignature(tuple(sorted(prof)), (m_l, m_t, m_d))


__all__ = [
    "ClassSignature",
    "class_signature",
    "full_shuffle_pairing",
    "half_shuffle_pairing",
    "make_urn",
    "sample_multigraph",
    "sample_pairing",
    "signature_from_nonsimple",
]
