"""Multiplicity-aware adjacency store.

Neighbourhoods live in a CSR layout (``offsets``/``nbr``) built once per run
with numpy.  A node whose neighbourhood is mutated is copied into a sorted
Python list (the dirty overlay); switchings touch few nodes, so the bulk of
the graph stays in the compact arrays.

Conventions: nodes are 0-based, nodes ``0..h-1`` are heavy, and a loop at v is
stored as two entries ``v`` in v's neighbourhood.  The non-simple map holds
every loop and every non-loop edge with multiplicity >= 2, keyed by
``(min, max)``.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from collections import Counter
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .degree_model import DegreeSequence

HEAVY_MULTI = "heavy_multi"
HEAVY_LOOP = "heavy_loop"
LIGHT_LOOP = "light_loop"
LIGHT_DOUBLE = "light_double"
LIGHT_TRIPLE = "light_triple"
OTHER = "other"
CLASSES = (HEAVY_MULTI, HEAVY_LOOP, LIGHT_LOOP, LIGHT_DOUBLE, LIGHT_TRIPLE, OTHER)


class GraphError(ValueError):
    pass


class IndexedSet:
    """Set with O(1) insert, delete and uniform sampling."""

    __slots__ = ("_items", "_pos")

    def __init__(self, items: Iterable = ()):
        self._items: list = []
        self._pos: dict = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        if x not in self._pos:
            self._pos[x] = len(self._items)
            self._items.append(x)

    def discard(self, x) -> None:
        i = self._pos.pop(x, None)
        if i is None:
            return
        last = self._items.pop()
        if i < len(self._items):
            self._items[i] = last
            self._pos[last] = i

    def sample(self, rng):
        if not self._items:
            raise GraphError("sampling from an empty registry")
        return self._items[rng.below(len(self._items))]

    def __contains__(self, x) -> bool:
        return x in self._pos

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)


def _ff2(x: int) -> int:
    return x * (x - 1)


def _ff3(x: int) -> int:
    return x * (x - 1) * (x - 2)


def classify(key: tuple[int, int], m: int, h: int) -> Optional[str]:
    """Registry class of the edge ``key`` at multiplicity m (None if simple or absent)."""
    u, v = key
    if u == v:
        if m == 0:
            return None
        if u < h:
            return HEAVY_LOOP
        return LIGHT_LOOP if m == 1 else OTHER
    if m < 2:
        return None
    if v < h:
        return HEAVY_MULTI
    if m == 2:
        return LIGHT_DOUBLE
    if m == 3:
        return LIGHT_TRIPLE
    return OTHER


def nonsimple_from_pairs(n: int, us: np.ndarray, vs: np.ndarray) -> dict[tuple[int, int], int]:
    """Map (u <= v) -> multiplicity for all loops and all edges of multiplicity >= 2."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    keys, counts = np.unique(lo * n + hi, return_counts=True)
    lo_k, hi_k = keys // n, keys % n
    mask = (counts >= 2) | (lo_k == hi_k)
    return {
        (int(a), int(b)): int(c)
        for a, b, c in zip(lo_k[mask].tolist(), hi_k[mask].tolist(), counts[mask].tolist())
    }


class Multigraph:
    def __init__(self, degrees: Sequence[int], h: int, us, vs):
        deg = np.asarray(degrees, dtype=np.int64)
        n = int(deg.size)
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.shape != vs.shape:
            raise GraphError("endpoint arrays differ in length")
        if us.size and (min(us.min(), vs.min()) < 0 or max(us.max(), vs.max()) >= n):
            raise GraphError("pair endpoint out of range")
        ends = np.concatenate([us, vs])
        if not np.array_equal(np.bincount(ends, minlength=n), deg):
            raise GraphError("pair endpoints do not match the degree sequence")
        others = np.concatenate([vs, us])
        keys = np.sort(ends * n + others)
        self.n = n
        self.h = max(0, min(n, int(h)))
        self.degrees = deg
        self.nbr = keys % n if n else keys
        self.offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=self.offsets[1:])
        self.pair_count = int(us.size)
        self._deg = deg.tolist()
        self._dirty: dict[int, list[int]] = {}
        self._mismatch = 0  # nodes whose current length differs from the CSR layout
        self._star_cache: dict = {}

        # Runs of equal keys in the sorted layout are the distinct (u, v) entries.
        if keys.size:
            starts = np.flatnonzero(np.concatenate([[True], keys[1:] != keys[:-1]]))
            counts = np.diff(np.concatenate([starts, [keys.size]]))
            rk = keys[starts]
            ru, rv = rk // n, rk % n
            bad = (ru == rv) | (counts >= 2)
            loss = np.zeros(n, dtype=np.int64)
            np.add.at(loss, ru[bad], counts[bad])
            ns_u, ns_v, ns_c = ru[bad], rv[bad], counts[bad]
            keep = ns_u <= ns_v
            self._ns: dict[tuple[int, int], int] = {}
            for a, b, c in zip(ns_u[keep].tolist(), ns_v[keep].tolist(), ns_c[keep].tolist()):
                self._ns[(a, b)] = c // 2 if a == b else c
        else:
            loss = np.zeros(n, dtype=np.int64)
            self._ns = {}
        s = deg - loss
        self.s: list[int] = s.tolist()
        hh = self.h
        self.simple_pair_total = int(s.sum())
        s2 = s * (s - 1)
        s3 = s2 * (s - 2)
        self.two_star_all = int(s2.sum())
        self.two_star_light = int(s2[hh:].sum())
        self.three_star_all = int(s3.sum())
        self.three_star_light = int(s3[hh:].sum())
        self.registry: dict[str, IndexedSet] = {c: IndexedSet() for c in CLASSES}
        for key, m in self._ns.items():
            cls = classify(key, m, hh)
            if cls is not None:
                self.registry[cls].add(key)

    @classmethod
    def build(
        cls,
        d: DegreeSequence | Sequence[int],
        pairs: Iterable[tuple[int, int]],
        h: int = 0,
        one_based: bool = False,
    ) -> "Multigraph":
        pairs = list(pairs)
        shift = 1 if one_based else 0
        us = np.fromiter((p[0] - shift for p in pairs), dtype=np.int64, count=len(pairs))
        vs = np.fromiter((p[1] - shift for p in pairs), dtype=np.int64, count=len(pairs))
        return cls(list(d), h, us, vs)

    # -- neighbourhood access -------------------------------------------

    def neighbors(self, v: int) -> list[int]:
        seg = self._dirty.get(v)
        if seg is not None:
            return list(seg)
        return self.nbr[self.offsets[v] : self.offsets[v + 1]].tolist()

    def degree(self, v: int) -> int:
        return self._deg[v]

    def _contains(self, a: int, b: int) -> bool:
        seg = self._dirty.get(a)
        if seg is not None:
            i = bisect_left(seg, b)
            return i < len(seg) and seg[i] == b
        lo, hi = int(self.offsets[a]), int(self.offsets[a + 1])
        i = bisect_left(self.nbr, b, lo, hi)
        return i < hi and self.nbr[i] == b

    def multiplicity(self, u: int, v: int) -> int:
        if u == v:
            return self._ns.get((u, u), 0)
        key = (u, v) if u < v else (v, u)
        m = self._ns.get(key)
        if m is not None:
            return m
        a, b = (u, v) if self._deg[u] <= self._deg[v] else (v, u)
        return 1 if self._contains(a, b) else 0

    def is_heavy(self, v: int) -> bool:
        return v < self.h

    def simple_neighbors(self, v: int) -> list[int]:
        """Distinct u != v joined to v by a single edge."""
        seg = self.neighbors(v)
        out = []
        k, L = 0, len(seg)
        while k < L:
            x = seg[k]
            j = k + 1
            while j < L and seg[j] == x:
                j += 1
            if j - k == 1 and x != v:
                out.append(x)
            k = j
        return out

    def neighbor_set(self, v: int) -> set[int]:
        return set(self.neighbors(v))

    def heavy_neighbor_count(self, v: int) -> int:
        """Distinct heavy u != v with m(v, u) >= 1."""
        seg = self.neighbors(v)
        cut = bisect_left(seg, self.h)
        return len({x for x in seg[:cut] if x != v})

    def heavy_simple_neighbor_count(self, v: int) -> int:
        return sum(1 for x in self.simple_neighbors(v) if x < self.h)

    def light_entry_count(self, v: int) -> int:
        """Entries of v's neighbourhood that point at light nodes."""
        seg = self._dirty.get(v)
        if seg is not None:
            return len(seg) - bisect_left(seg, self.h)
        lo, hi = int(self.offsets[v]), int(self.offsets[v + 1])
        return hi - bisect_left(self.nbr, self.h, lo, hi)

    # -- registries -------------------------------------------------------

    @property
    def m_l(self) -> int:
        return len(self.registry[LIGHT_LOOP])

    @property
    def m_d(self) -> int:
        return len(self.registry[LIGHT_DOUBLE])

    @property
    def m_t(self) -> int:
        return len(self.registry[LIGHT_TRIPLE])

    @property
    def other_bad(self) -> int:
        return len(self.registry[OTHER])

    def nonsimple_items(self) -> list[tuple[tuple[int, int], int]]:
        return sorted(self._ns.items())

    def heavy_multi_edges(self) -> list[tuple[int, int, int]]:
        return sorted((u, v, self._ns[(u, v)]) for (u, v) in self.registry[HEAVY_MULTI])

    def heavy_loops(self) -> list[tuple[int, int]]:
        return sorted((u, self._ns[(u, u)]) for (u, _) in self.registry[HEAVY_LOOP])

    def heavy_weight(self, v: int) -> int:
        """W_v: total multiplicity of heavy multi-edges incident with v."""
        if v >= self.h:
            return 0
        total = 0
        for (a, b) in self.registry[HEAVY_MULTI]:
            if a == v or b == v:
                total += self._ns[(a, b)]
        return total

    def sample_registry_item(self, cls: str, rng) -> tuple[int, int]:
        return self.registry[cls].sample(rng)

    def is_simple(self) -> bool:
        return not self._ns

    def class_counts(self) -> dict[str, int]:
        return {c: len(r) for c, r in self.registry.items()}

    # -- mutation -----------------------------------------------------------

    def _seg_for_write(self, v: int) -> list[int]:
        seg = self._dirty.get(v)
        if seg is None:
            seg = self.nbr[self.offsets[v] : self.offsets[v + 1]].tolist()
            self._dirty[v] = seg
        return seg

    def _set_len(self, v: int, new: int) -> None:
        base = int(self.offsets[v + 1] - self.offsets[v])
        old = self._deg[v]
        self._mismatch += (new != base) - (old != base)
        self._deg[v] = new

    def _bump_s(self, x: int, delta: int) -> None:
        old = self.s[x]
        new = old + delta
        self.s[x] = new
        d2 = _ff2(new) - _ff2(old)
        d3 = _ff3(new) - _ff3(old)
        self.simple_pair_total += delta
        self.two_star_all += d2
        self.three_star_all += d3
        if x >= self.h:
            self.two_star_light += d2
            self.three_star_light += d3

    def _transition(self, u: int, v: int, old: int, new: int) -> None:
        key = (u, v) if u <= v else (v, u)
        if u != v:
            delta = (new == 1) - (old == 1)
            if delta:
                self._bump_s(u, delta)
                self._bump_s(v, delta)
        c_old = classify(key, old, self.h)
        c_new = classify(key, new, self.h)
        if c_old != c_new:
            if c_old is not None:
                self.registry[c_old].discard(key)
            if c_new is not None:
                self.registry[c_new].add(key)
        if (u == v and new >= 1) or new >= 2:
            self._ns[key] = new
        else:
            self._ns.pop(key, None)

    def add_pair(self, u: int, v: int) -> None:
        old = self.multiplicity(u, v)
        su = self._seg_for_write(u)
        insort(su, v)
        if u == v:
            insort(su, v)
            self._set_len(u, len(su))
        else:
            sv = self._seg_for_write(v)
            insort(sv, u)
            self._set_len(u, len(su))
            self._set_len(v, len(sv))
        self.pair_count += 1
        self._transition(u, v, old, old + 1)

    def remove_pair(self, u: int, v: int) -> None:
        old = self.multiplicity(u, v)
        if old == 0:
            raise GraphError(f"no pair ({u}, {v}) to remove")
        su = self._seg_for_write(u)
        del su[bisect_left(su, v)]
        if u == v:
            del su[bisect_left(su, v)]
            self._set_len(u, len(su))
        else:
            sv = self._seg_for_write(v)
            del sv[bisect_left(sv, u)]
            self._set_len(u, len(su))
            self._set_len(v, len(sv))
        self.pair_count -= 1
        self._transition(u, v, old, old - 1)

    def compact(self) -> None:
        """Fold the dirty overlay back into the CSR arrays."""
        if not self._dirty:
            return
        lengths = np.asarray(self._deg, dtype=np.int64)
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        nbr = np.empty(int(offsets[-1]), dtype=np.int64)
        old_off, old_nbr = self.offsets, self.nbr
        if self._mismatch == 0:
            nbr[:] = old_nbr
            for v, seg in self._dirty.items():
                nbr[offsets[v] : offsets[v + 1]] = seg
        else:
            for v in range(self.n):
                seg = self._dirty.get(v)
                if seg is None:
                    seg = old_nbr[old_off[v] : old_off[v + 1]]
                nbr[offsets[v] : offsets[v + 1]] = seg
        self.offsets, self.nbr = offsets, nbr
        self._dirty = {}
        self._mismatch = 0
        self._star_cache = {}

    # -- sampling -------------------------------------------------------------

    def _locate(self, v: int, x: int) -> int:
        """Index of the first entry x inside v's neighbourhood."""
        seg = self._dirty.get(v)
        if seg is not None:
            return bisect_left(seg, x)
        lo, hi = int(self.offsets[v]), int(self.offsets[v + 1])
        return bisect_left(self.nbr, x, lo, hi) - lo

    def _entry(self, v: int, pos: int) -> int:
        seg = self._dirty.get(v)
        if seg is not None:
            return seg[pos]
        return int(self.nbr[self.offsets[v] + pos])

    def instance_at(self, v: int, pos: int) -> tuple[int, int, tuple[int, int, int]]:
        """(v, x, instance key) for the pair occupying slot ``pos`` of v."""
        x = self._entry(v, pos)
        occ = pos - self._locate(v, x)
        if x == v:
            return v, x, (v, v, occ // 2)
        a, b = (v, x) if v < x else (x, v)
        return v, x, (a, b, occ)

    def sample_ordered_pair(self, rng) -> tuple[int, int, tuple[int, int, int]]:
        """Uniform ordered pair instance: (u, v, instance key)."""
        if self.pair_count == 0:
            raise GraphError("graph has no pairs")
        if self._mismatch:
            self.compact()
        slot = rng.below(2 * self.pair_count)
        u = bisect_right(self.offsets, slot) - 1
        return self.instance_at(u, slot - int(self.offsets[u]))

    def _star_table(self, k: int, light_only: bool):
        key = (k, light_only)
        tab = self._star_cache.get(key)
        if tab is None:
            deg = np.asarray(self._deg, dtype=np.int64)
            big = int(deg.max(initial=0)) ** k * max(1, self.n) >= 1 << 62
            w = np.ones(self.n, dtype=object if big else np.int64)
            for i in range(k):
                w = w * np.maximum(deg - i, 0)
            if light_only:
                w[: self.h] = 0
            cum = np.cumsum(w)
            tab = (cum, int(cum[-1]) if cum.size else 0)
            self._star_cache[key] = tab
        return tab

    def star_weight(self, k: int, light_only: bool = False) -> int:
        return self._star_table(k, light_only)[1]

    def sample_ordered_k_star(self, k: int, light_only: bool, rng):
        """Centre v with probability [d_v]_k / total, then k distinct slots in order.

        Returns (centre, arms, instance keys).  The star may use loop or multi
        slots; callers reject those.
        """
        if self._mismatch:
            self.compact()
        cum, total = self._star_table(k, light_only)
        if total == 0:
            raise GraphError(f"no {k}-star to sample")
        r = rng.below(total)
        v = int(np.searchsorted(cum, r, side="right"))
        positions = rng.sample(self._deg[v], k)
        arms, keys = [], []
        for p in positions:
            _, x, inst = self.instance_at(v, p)
            arms.append(x)
            keys.append(inst)
        return v, arms, keys

    # -- bulk views -------------------------------------------------------------

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Every pair instance once, as (u, v) with u <= v."""
        for u in range(self.n):
            seg = self.neighbors(u)
            loops = 0
            for x in seg:
                if x > u:
                    yield (u, x)
                elif x == u:
                    loops += 1
            for _ in range(loops // 2):
                yield (u, u)

    def edge_array(self) -> np.ndarray:
        """(k, 2) array of pair instances with u <= v, sorted lexicographically."""
        self.compact()
        deg = np.diff(self.offsets)
        us = np.repeat(np.arange(self.n, dtype=np.int64), deg)
        vs = self.nbr
        keep = vs > us
        loops = vs == us
        out = np.stack([us[keep], vs[keep]], axis=1)
        if loops.any():
            lu = us[loops][::2]
            out = np.concatenate([out, np.stack([lu, lu], axis=1)])
            out = out[np.lexsort((out[:, 1], out[:, 0]))]
        return out

    def edge_set(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.pairs()))

    def rescan(self) -> dict:
        """Recompute every counter and registry from scratch (test oracle)."""
        mult: Counter = Counter(self.pairs())
        s = [0] * self.n
        reg = {c: set() for c in CLASSES}
        for (u, v), m in mult.items():
            if u != v and m == 1:
                s[u] += 1
                s[v] += 1
            cls = classify((u, v), m, self.h)
            if cls is not None:
                reg[cls].add((u, v))
        light = range(self.h, self.n)
        return {
            "s": s,
            "simple_pair_total": sum(s),
            "two_star_all": sum(_ff2(x) for x in s),
            "two_star_light": sum(_ff2(s[v]) for v in light),
            "three_star_all": sum(_ff3(x) for x in s),
            "three_star_light": sum(_ff3(s[v]) for v in light),
            "registry": reg,
            "pair_count": sum(mult.values()),
        }

    def snapshot(self) -> dict:
        return {
            "s": list(self.s),
            "simple_pair_total": self.simple_pair_total,
            "two_star_all": self.two_star_all,
            "two_star_light": self.two_star_light,
            "three_star_all": self.three_star_all,
            "three_star_light": self.three_star_light,
            "registry": {c: set(r) for c, r in self.registry.items()},
            "pair_count": self.pair_count,
        }

    def write_edge_list(self, path, seed: int = 0) -> None:
        text = format_edge_list(self.n, self.edge_array(), seed)
        if path in (None, "-"):
            import sys

            sys.stdout.write(text)
        else:
            Path(path).write_text(text, encoding="utf-8")


def format_edge_list(n: int, edges, seed: int) -> str:
    """Edge-list text: header line, then ``u v`` per pair (1-based, u <= v, sorted)."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    arr = np.sort(arr, axis=1)
    arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))] + 1
    body = "\n".join(f"{u} {v}" for u, v in arr.tolist())
    head = f"# nodes={n} pairs={len(arr)} seed={seed}\n"
    return head + (body + "\n" if body else "")


def parse_edge_list(text: str) -> tuple[int, list[tuple[int, int]]]:
    n = None
    edges = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("nodes="):
                    n = int(tok[6:])
            continue
        a, b = line.split()
        edges.append((int(a) - 1, int(b) - 1))
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return n, edges
