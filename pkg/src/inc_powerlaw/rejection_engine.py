"""Exact rejection probabilities, backward counts and booster schedulers.

Every probability is a ``Fraction`` over Python integers.  Lower bounds that
come out non-positive at small n give acceptance probability 0.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .degree_model import SequenceStats, falling_factorial
from .multigraph import LIGHT_LOOP, Multigraph
from .switchings import DOUBLET_TYPES, doublet_k

ONE = Fraction(1)
ZERO = Fraction(0)


class ExactProbability(Fraction):
    """A rational in [0, 1]."""

    def __new__(cls, numerator=0, denominator=None):
        self = super().__new__(cls, numerator, denominator)
        if self < 0 or self > 1:
            raise ValueError(f"probability out of range: {self}")
        return self


def ratio(num: int, den: int) -> Fraction:
    """num/den clamped into [0, 1]; 0 when either side is non-positive."""
    if num <= 0 or den <= 0:
        return ZERO
    if num >= den:
        return ONE
    return Fraction(num, den)


def bernoulli(p, rng) -> bool:
    """True with probability exactly p.

    Compares the binary expansion of a uniform U in [0, 1) with that of p,
    64 bits at a time, until the comparison is decided.
    """
    p = Fraction(p)
    if p <= 0:
        return False
    if p >= 1:
        return True
    num, den = p.numerator, p.denominator
    while True:
        num <<= 64
        t, num = divmod(num, den)
        r = rng.bits(64)
        if r != t:
            return r < t
        if num == 0:
            # the remaining expansion of p is all zeros while U's is not
            return False


def choose(weights: Sequence[tuple[object, Fraction]], rng):
    """Pick a label with its probability; None with the leftover mass.

    Implemented as a chain of exact conditional coins.
    """
    remaining = ONE
    for label, w in weights:
        if w <= 0:
            continue
        if w >= remaining or bernoulli(w / remaining, rng):
            return label
        remaining -= w
    return None


def _ff(x: int, k: int) -> int:
    if k <= 0:
        return 1
    if x < k:
        return 0
    return falling_factorial(x, k)


# -- Phases 1 and 2 -----------------------------------------------------------


def phase1_b(D_i: int, D_j: int, Y1: int, Y2: int, m: int, h: int) -> dict:
    """Backward quantities of the heavy-m-way switching.

    D_i = d_i - W_{i,j}, D_j = d_j - W_{j,i} and Y1, Y2 are the numbers of heavy
    nodes joined to i and j by single edges in G'.
    """
    b = 0
    for l in range(m + 1):
        b += (
            (-1) ** l
            * comb(m, l)
            * _ff(Y1, l)
            * _ff(Y2, l)
            * _ff(D_i - l, m - l)
            * _ff(D_j - l, m - l)
        )
    b_low = _ff(D_i, m) * _ff(D_j, m) - m * h * h * _ff(D_i, m - 1) * _ff(D_j, m - 1)
    return {"b": b, "b_low": b_low, "b_bar1": D_i * D_j}


def phase1_f_low(stats: SequenceStats) -> int:
    return stats.M[1] - 2 * stats.H[1]


def phase1_f(g: Multigraph, i: int, j: int, stats: SequenceStats) -> dict:
    """Forward count of heavy-1-way switchings on G'' (where ij is single)."""
    lh = {u: g.light_entry_count(u) for u in range(g.h)}
    z1 = stats.L[1] - sum(lh.values())
    z2 = sum(c for u, c in lh.items() if u not in (i, j) and g.multiplicity(i, u) == 0)
    z3 = sum(c for u, c in lh.items() if u not in (i, j) and g.multiplicity(j, u) == 0)
    return {"Z1": z1, "Z2": z2, "Z3": z3, "f": z1 + z2 + z3, "f_low": phase1_f_low(stats)}


def phase2_b(d_i: int, Y: int, m: int, h: int) -> dict:
    b = 0
    for l in range(m + 1):
        b += (-1) ** l * comb(m, l) * _ff(Y, 2 * l) * _ff(d_i - 2 * l, 2 * m - 2 * l)
    b_low = _ff(d_i, 2 * m) - m * h * h * _ff(d_i, 2 * m - 2)
    return {"b": b, "b_low": b_low}


# -- generic local counts ------------------------------------------------------


def pair_count(g: Multigraph, F: Iterable[int], A: Iterable[int], B: Iterable[int]) -> int:
    """Simple ordered pairs (x, y) with x, y outside F, x not in A, y not in B."""
    F = set(F)
    sn = {x: set(g.simple_neighbors(x)) for x in F}

    def sf(a: int) -> int:
        return sum(1 for x in F if a in sn[x])

    s = g.s
    total = g.simple_pair_total
    total -= 2 * sum(s[x] for x in F) - sum(len(sn[x] & F) for x in F)
    A = set(A) - F
    B = set(B) - F
    total -= sum(s[a] - sf(a) for a in A)
    total -= sum(s[b] - sf(b) for b in B)
    # pairs with x in A and y in B were subtracted twice
    small, other = (A, B) if len(A) <= len(B) else (B, A)
    both = 0
    for a in small:
        if s[a]:
            both += sum(1 for y in g.simple_neighbors(a) if y in other)
    return total + both


def pair_counts(g: Multigraph, base: Iterable[int], pairs) -> list[int]:
    """Relaxed counts for the additional pairs, in order."""
    used = set(base)
    out = []
    for x, y, p, q in pairs:
        out.append(pair_count(g, used, g.neighbor_set(p), g.neighbor_set(q)))
        used.add(x)
        used.add(y)
    return out


# -- Phase 3 --------------------------------------------------------------------


def phase3_bounds(stats: SequenceStats, m_l: int, m_t: int, m_d: int) -> tuple[int, int]:
    d_h, d_1 = stats.d_light, stats.d1
    b0 = stats.L[2] - 12 * m_t * d_h - 8 * m_d * d_h - m_l * d_h * d_h
    b1 = stats.M[1] - 6 * m_t - 4 * m_d - 2 * m_l - 2 * stats.A2 - 4 * d_1 - 2 * d_h
    return b0, b1


def phase3_b(g: Multigraph, star: tuple[int, int, int], stats: SequenceStats) -> dict:
    """Counts after an l-switching created the light two-star ``star``."""
    v1, v2, v3 = star
    looped = sum(_ff(g.s[v], 2) for (v, _) in g.registry[LIGHT_LOOP])
    empty = g.two_star_light - looped
    b_star = pair_count(g, (v1, v2, v3), g.neighbor_set(v2), g.neighbor_set(v3))
    b0, b1 = phase3_bounds(stats, g.m_l, g.m_t, g.m_d)
    return {"b_empty": empty, "b_star": b_star, "b0_low": b0, "b1_low": b1}


# -- Phase 4 --------------------------------------------------------------------


def _ordered_avoiding(S: set, A1: set, A2: set, A3: set) -> int:
    """Ordered triples of distinct elements of S with x not in A1, y not in A2, z not in A3."""
    s = len(S)
    a1, a2, a3 = A1 & S, A2 & S, A3 & S
    n1, n2, n3 = len(a1), len(a2), len(a3)
    i12, i13, i23 = len(a1 & a2), len(a1 & a3), len(a2 & a3)
    i123 = len(a1 & a2 & a3)
    one = (n1 + n2 + n3) * _ff(s - 1, 2)
    two = (n1 * n2 - i12 + n1 * n3 - i13 + n2 * n3 - i23) * max(s - 2, 0)
    three = n1 * n2 * n3 - i12 * n3 - i13 * n2 - i23 * n1 + 2 * i123
    return _ff(s, 3) - one + two - three


def multi_neighbors(g: Multigraph, v: int) -> set[int]:
    seg = g.neighbors(v)
    out = set()
    for k in range(1, len(seg)):
        if seg[k] == seg[k - 1] and seg[k] != v:
            out.add(seg[k])
    return out


def three_star_count(g: Multigraph, v1: int, arms: Sequence[int]) -> int:
    """Light simple ordered three-stars (c; x, y, z) compatible with v1's star.

    Compatible: no shared node with {v1} + arms, no edge v1-c, and none of the
    pairs arms[p]-(x, y, z)[p] is a multi-edge.
    """
    F = {v1, *arms}
    X = [multi_neighbors(g, a) for a in arms]
    h = g.h
    n_v1 = g.neighbor_set(v1)
    special = set(F) | n_v1
    for x in F:
        special.update(g.simple_neighbors(x))
    for xs in X:
        for x in xs:
            special.update(g.simple_neighbors(x))
    total = g.three_star_light
    for c in special:
        if c < h:
            continue
        total -= _ff(g.s[c], 3)
        if c in F or c in n_v1:
            continue
        S = set(g.simple_neighbors(c)) - F
        total += _ordered_avoiding(S, X[0], X[1], X[2])
    return total


def phase4_bounds(stats: SequenceStats, m_t: int, m_d: int) -> tuple[int, int]:
    d1, dh = stats.d1, stats.d_light
    B2, B3 = stats.B[2], stats.B[3]
    b0 = stats.M[3] - 18 * m_t * d1 * d1 - 12 * m_d * d1 * d1
    b1 = (
        stats.L[3]
        - 18 * m_t * dh * dh
        - 12 * m_d * dh * dh
        - B3
        - 3 * (m_t + m_d) * B2
        - dh**3
        - 9 * B2
    )
    return b0, b1


def phase4_pair_bound(stats: SequenceStats, i: int, m_t: int, m_d: int) -> int:
    """Lower bound for the i-th additional pair (i >= 1)."""
    d1 = stats.d1
    return stats.M[1] - 6 * m_t - 4 * m_d - 16 * d1 - 4 * (i - 1) * d1 - 2 * stats.A2


def phase4_b(g: Multigraph, v1: int, arms: Sequence[int], extra, stats: SequenceStats, nodes) -> dict:
    b0, b1 = phase4_bounds(stats, g.m_t, g.m_d)
    pairs = pair_counts(g, nodes, extra)
    lows = [phase4_pair_bound(stats, i + 1, g.m_t, g.m_d) for i in range(len(extra))]
    return {
        "b_empty": g.three_star_all,
        "b_star": three_star_count(g, v1, arms),
        "b0_low": b0,
        "b1_low": b1,
        "pairs": pairs,
        "pairs_low": lows,
    }


# -- Phase 5 --------------------------------------------------------------------


def two_star_count(g: Multigraph, F: Iterable[int]) -> int:
    """Light simple ordered two-stars sharing no node with F."""
    F = set(F)
    h = g.h
    special = set(F)
    for x in F:
        special.update(g.simple_neighbors(x))
    total = g.two_star_light
    for c in special:
        if c < h:
            continue
        total -= _ff(g.s[c], 2)
        if c in F:
            continue
        inside = sum(1 for y in g.simple_neighbors(c) if y in F)
        total += _ff(g.s[c] - inside, 2)
    return total


def phase5_bounds(stats: SequenceStats, m_d: int) -> tuple[int, int]:
    d1, dh = stats.d1, stats.d_light
    b0 = stats.M[2] - 8 * m_d * d1
    b1 = stats.L[2] - 8 * m_d * dh - 6 * stats.B[1] - 3 * dh * dh
    return b0, b1


def phase5_pair_bound(stats: SequenceStats, i: int, m_d: int) -> int:
    d1 = stats.d1
    return stats.M[1] - 4 * m_d - 12 * d1 - 4 * (i - 1) * d1 - 2 * stats.A2


def phase5_b(g: Multigraph, v1: int, arms: Sequence[int], extra, stats: SequenceStats, nodes) -> dict:
    b0, b1 = phase5_bounds(stats, g.m_d)
    pairs = pair_counts(g, nodes, extra)
    lows = [phase5_pair_bound(stats, i + 1, g.m_d) for i in range(len(extra))]
    return {
        "b_empty": g.two_star_all,
        "b_star": two_star_count(g, (v1, *arms)),
        "b0_low": b0,
        "b1_low": b1,
        "pairs": pairs,
        "pairs_low": lows,
    }


def relaxed_acceptance(counts: Sequence[int], lows: Sequence[int]) -> Fraction:
    """Product of b_low / b over the relaxation steps, 0 if any bound is non-positive."""
    num, den = 1, 1
    for c, lo in zip(counts, lows):
        if lo <= 0 or c <= 0:
            return ZERO
        num *= lo
        den *= c
    return ratio(num, den)


def _positive_product(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        if v <= 0:
            return 0
        out *= v
    return out


# -- schedulers -----------------------------------------------------------------


class BudgetExceeded(Exception):
    """Scheduler probabilities no longer form a sub-distribution."""


class Scheduler4:
    BOOSTERS = ("ta", "tb", "tc")
    PAIRS = {"ta": 3, "tb": 6, "tc": 9}

    def __init__(self, stats: SequenceStats, i1: int, m_d: int):
        self.stats = stats
        self.i1 = i1
        self.m_d = m_d
        M, L = stats.M, stats.L
        self.rho_t = ONE - stats.epsilon
        self.rho = {k: ZERO for k in self.BOOSTERS}
        self.fbar = {
            "ta": 3 * M[3] * L[3] * M[2] ** 2,
            "tb": 3 * M[3] * L[3] * M[2] ** 4,
            "tc": M[3] * L[3] * M[2] ** 6,
        }
        self.x = {i1: ONE}
        self.i = i1

    def f_t(self, i: int) -> int:
        return 12 * i * self.stats.M[1] ** 3

    def bt_low(self, i: int) -> int:
        return _positive_product(phase4_bounds(self.stats, i, self.m_d))

    def btau_low(self, kind: str, i: int) -> int:
        k = self.PAIRS[kind]
        return _positive_product(phase4_pair_bound(self.stats, p, i, self.m_d) for p in range(1, k + 1))

    def x_at(self, i: int) -> Fraction:
        if i in self.x:
            return self.x[i]
        if i > self.i1:
            raise ValueError("x is only defined up to i_1")
        j = min(k for k in self.x if k > i)
        while j > i:
            j -= 1
            self.x[j] = self.x[j + 1] * self.rho_t * Fraction(self.bt_low(j), self.f_t(j + 1)) + 1
        return self.x[i]

    def update(self, i: int) -> None:
        """Recompute booster probabilities after a t-switching left i triples."""
        self.i = i
        xi, xn = self.x_at(i), self.x_at(i + 1)
        for kind in self.BOOSTERS:
            low = self.btau_low(kind, i)
            if low == 0:
                self.rho[kind] = ZERO
            else:
                self.rho[kind] = (xn / xi) * self.rho_t * Fraction(self.fbar[kind], low * self.f_t(i + 1))
        if self.rho_t < 0 or self.rho_t + sum(self.rho.values()) > 1:
            raise BudgetExceeded("phase 4 type probabilities exceed 1")

    def weights(self) -> list[tuple[str, Fraction]]:
        return [("t", self.rho_t)] + [(k, self.rho[k]) for k in self.BOOSTERS]


class Scheduler5:
    TYPES = DOUBLET_TYPES

    def __init__(self, stats: SequenceStats, i1: int):
        self.stats = stats
        self.i1 = i1
        self.xi = stats.xi
        self.x = {i1: ONE}
        self.rho_d_table = {i1: ONE - self.xi}
        self.rho = {t: ZERO for t in self.TYPES}
        self.rho_d = ONE - self.xi
        self.i = i1
        M, L = stats.M, stats.L

        def sq(k: int) -> int:
            return M[k] ** 2 if k >= 2 else 1

        self.fbar = {}
        for t in self.TYPES:
            m1, m2, m3 = t
            k1, k2, k3 = m1 + 2, m2 + 1, m3 + 1
            self.fbar[t] = M[k1] * L[k1] * sq(k2) * sq(k3)

    def f_d(self, i: int) -> int:
        return 4 * i * self.stats.M[1] ** 2

    def bd_low(self, i: int) -> int:
        return _positive_product(phase5_bounds(self.stats, i))

    def btau_low(self, t, i: int) -> int:
        k = doublet_k(*t)
        return _positive_product(phase5_pair_bound(self.stats, p, i) for p in range(1, k + 1))

    def _rho_formula(self, t, i: int, ip: int) -> Fraction:
        low = self.btau_low(t, ip)
        if low == 0:
            return ZERO
        return (
            (self.x_at(ip + 1) / self.x_at(i))
            * self.rho_d_at(ip + 1)
            * Fraction(self.fbar[t], low * self.f_d(ip + 1))
        )

    def _extend(self, i: int) -> None:
        j = min(k for k in self.x if k > i) if i not in self.x else i
        while j > i:
            j -= 1
            self.x[j] = (
                self.x[j + 1] * self.rho_d_table[j + 1] * Fraction(self.bd_low(j), self.f_d(j + 1)) + 1
            )
            self.rho_d_table[j] = ONE - self._rho_formula((1, 0, 0), j, j) - self.xi

    def x_at(self, i: int) -> Fraction:
        if i > self.i1:
            raise ValueError("x is only defined up to i_1")
        if i not in self.x:
            self._extend(i)
        return self.x[i]

    def rho_d_at(self, i: int) -> Fraction:
        if i not in self.rho_d_table:
            self._extend(i)
        return self.rho_d_table[i]

    def update(self, i: int) -> None:
        """Recompute type probabilities for a graph with i double-edges."""
        self.i = i
        for t in self.TYPES:
            ip = i + sum(1 for m in t if m == 2)
            if ip > self.i1 - 1:
                self.rho[t] = ZERO
            else:
                self.rho[t] = self._rho_formula(t, i, ip)
        self.rho_d = self.rho_d_at(i)
        if self.rho_d < 0 or self.rho_d + sum(self.rho.values()) > 1:
            raise BudgetExceeded("phase 5 type probabilities exceed 1")

    def weights(self) -> list[tuple[object, Fraction]]:
        return [("d", self.rho_d)] + [(t, self.rho[t]) for t in self.TYPES]
