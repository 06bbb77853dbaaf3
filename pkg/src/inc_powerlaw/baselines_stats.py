"""Reference samplers and the chi-square harness.

``enumerate_graphs`` lists every labelled simple graph with a given degree
sequence (tiny inputs only), ``edge_switch`` is the lazy Edge-Switching chain,
and ``chi_square_uniformity`` compares sample counts with the uniform law over
the enumeration.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from scipy.stats import chi2

MAX_ENUM_NODES = 10
MAX_ENUM_DEGREE_SUM = 24

Edge = tuple[int, int]


class EnumerationGuardError(ValueError):
    pass


class SampleOutsideEnumeration(RuntimeError):
    """A sample is not a member of G(d); the generator is broken."""


@dataclass(frozen=True)
class Enumeration:
    degrees: tuple[int, ...]
    graphs: tuple[tuple[Edge, ...], ...]

    @property
    def count(self) -> int:
        return len(self.graphs)


def canonical(edges: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    return tuple(sorted((min(int(u), int(v)), max(int(u), int(v))) for u, v in edges))


def enumerate_graphs(degrees: Sequence[int]) -> Enumeration:
    """All labelled simple graphs with the given degrees (0-based node ids)."""
    d = [int(x) for x in degrees]
    n = len(d)
    if n > MAX_ENUM_NODES or sum(d) > MAX_ENUM_DEGREE_SUM:
        raise EnumerationGuardError(
            f"enumeration limited to n <= {MAX_ENUM_NODES} and degree sum <= {MAX_ENUM_DEGREE_SUM}"
        )
    out: list[tuple[Edge, ...]] = []
    if sum(d) % 2 or any(x < 0 for x in d):
        return Enumeration(tuple(d), ())
    residual = list(d)
    chosen: list[Edge] = []

    def rec(u: int) -> None:
        while u < n and residual[u] == 0:
            u += 1
        if u == n:
            out.append(tuple(sorted(chosen)))
            return
        need = residual[u]
        cands = [v for v in range(u + 1, n) if residual[v] > 0]
        if len(cands) < need:
            return
        for combo in combinations(cands, need):
            residual[u] = 0
            for v in combo:
                residual[v] -= 1
                chosen.append((u, v))
            rec(u + 1)
            for v in combo:
                residual[v] += 1
                chosen.pop()
            residual[u] = need

    rec(0)
    return Enumeration(tuple(d), tuple(sorted(out)))


def havel_hakimi(degrees: Sequence[int]) -> list[Edge]:
    """Deterministic simple realisation of a graphical sequence."""
    heap = [(-x, v) for v, x in enumerate(degrees) if x > 0]
    heapq.heapify(heap)
    edges: list[Edge] = []
    while heap:
        negd, v = heapq.heappop(heap)
        k = -negd
        if k > len(heap):
            raise ValueError("sequence is not graphical")
        taken = [heapq.heappop(heap) for _ in range(k)]
        for nd, u in taken:
            edges.append((min(u, v), max(u, v)))
            if nd + 1 < 0:
                heapq.heappush(heap, (nd + 1, u))
    return sorted(edges)


def edge_switch(edges: Sequence[Edge], swaps_per_edge: float, rng) -> list[Edge]:
    """Lazy Edge-Switching chain.

    Performs round(swaps_per_edge * m) attempts.  Each attempt picks two
    distinct edges and one of the two rewirings; it is skipped if the result
    would contain a loop or a parallel edge.
    """
    E = [(min(u, v), max(u, v)) for u, v in edges]
    m = len(E)
    present = set(E)
    if len(present) != m or any(u == v for u, v in E):
        raise ValueError("edge_switch needs a simple graph")
    steps = int(round(swaps_per_edge * m))
    if m < 2:
        return sorted(E)
    for _ in range(steps):
        i = rng.below(m)
        j = rng.below(m - 1)
        if j >= i:
            j += 1
        a, b = E[i]
        c, d = E[j]
        if rng.below(2):
            c, d = d, c
        # (a, b), (c, d) -> (a, d), (c, b)
        if a == d or c == b:
            continue
        e1 = (min(a, d), max(a, d))
        e2 = (min(c, b), max(c, b))
        if e1 in present or e2 in present:
            continue
        present.discard(E[i])
        present.discard(E[j])
        present.add(e1)
        present.add(e2)
        E[i], E[j] = e1, e2
    return sorted(E)


@dataclass
class ChiSquareReport:
    categories: int
    observed: list[int]
    expected: float
    statistic: float
    dof: int
    p_value: float

    def to_text(self) -> str:
        lines = [
            f"categories  {self.categories}",
            f"samples     {sum(self.observed)}",
            f"expected    {self.expected:.3f}",
            f"statistic   {self.statistic:.6f}",
            f"dof         {self.dof}",
            f"p_value     {self.p_value:.6g}",
            f"min/max obs {min(self.observed)}/{max(self.observed)}",
        ]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        rows = ["category,observed,expected"]
        rows += [f"{i},{o},{self.expected:.6f}" for i, o in enumerate(self.observed)]
        return "\n".join(rows) + "\n"


def chi_square_p(statistic: float, dof: int) -> float:
    if dof <= 0:
        return 1.0
    return float(chi2.sf(statistic, dof))


def chi_square_uniformity(samples: Iterable, enum: Enumeration) -> ChiSquareReport:
    index = {g: k for k, g in enumerate(enum.graphs)}
    counts = [0] * len(index)
    for s in samples:
        key = canonical(s)
        k = index.get(key)
        if k is None:
            raise SampleOutsideEnumeration(f"sample {key} is not in the enumeration")
        counts[k] += 1
    N = sum(counts)
    K = len(counts)
    if K == 0:
        raise ValueError("empty enumeration")
    E = N / K
    stat = sum((o - E) ** 2 / E for o in counts) if E > 0 else 0.0
    return ChiSquareReport(K, counts, E, stat, K - 1, chi_square_p(stat, K - 1))


def category_counts(samples: Iterable) -> Counter:
    return Counter(canonical(s) for s in samples)
