"""Switchings: candidate sampling, validity, apply and revert.

A candidate is checked by applying it to the live graph, inspecting the
result and reverting when it is not valid.  Validity has two parts:

* the registry delta over the touched edges equals the kind's intended
  delta (Phases 1 and 2 only look at heavy edges, since their classes are
  defined by the heavy profile alone);
* the structure created in G' meets exactly the conditions that the backward
  counts of the rejection engine enumerate (distinct anchors, simple stars,
  prescribed multiplicities, node-disjoint simple additional pairs whose
  endpoints are not adjacent to their anchors).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .multigraph import (
    HEAVY_LOOP,
    HEAVY_MULTI,
    LIGHT_DOUBLE,
    LIGHT_LOOP,
    LIGHT_TRIPLE,
    Multigraph,
    classify,
)

T_KINDS = ("t", "ta", "tb", "tc")
DOUBLET_TYPES = tuple(
    (a, b, c) for a in range(3) for b in range(3) for c in range(3) if (a, b, c) != (0, 0, 0)
)


@dataclass(frozen=True)
class SwitchingKind:
    name: str
    m: tuple[int, ...] = ()

    def __str__(self) -> str:
        if self.m:
            return f"{self.name}{self.m}"
        return self.name


def doublet_k(m1: int, m2: int, m3: int) -> int:
    """Number of additional pairs created by a doublet booster."""
    return (m1 if m1 >= 1 else 0) + (m2 + 2 if m2 >= 1 else 0) + (m3 + 2 if m3 >= 1 else 0)


@dataclass
class Structure:
    """Created triplet/doublet: two stars and the multiplicity pattern.

    ``pattern[0]`` is m(c1, c2); ``pattern[p + 1]`` is m(arms1[p], arms2[p]).
    """

    c1: int
    arms1: list[int]
    c2: int
    arms2: list[int]
    pattern: tuple[int, ...]

    def nodes(self) -> list[int]:
        return [self.c1, *self.arms1, self.c2, *self.arms2]


@dataclass
class SwitchingInstance:
    kind: SwitchingKind
    anchors: tuple[int, ...]
    removed: list[tuple[int, int]]
    added: list[tuple[int, int]]
    removed_keys: list[tuple] = field(default_factory=list)
    # additional pairs (x, y, anchor of x, anchor of y) in relaxation order
    extra_pairs: list[tuple[int, int, int, int]] = field(default_factory=list)
    structure: Optional[Structure] = None
    star_checks: list[tuple[int, list[int]]] = field(default_factory=list)
    target: Optional[tuple[int, int]] = None
    applied: bool = False


# -- apply / revert ------------------------------------------------------------


def apply(g: Multigraph, inst: SwitchingInstance) -> None:
    for u, v in inst.removed:
        g.remove_pair(u, v)
    for u, v in inst.added:
        g.add_pair(u, v)
    inst.applied = True


def revert(g: Multigraph, inst: SwitchingInstance) -> None:
    for u, v in inst.added:
        g.remove_pair(u, v)
    for u, v in inst.removed:
        g.add_pair(u, v)
    inst.applied = False


def _touched(inst: SwitchingInstance) -> set[tuple[int, int]]:
    return {(u, v) if u <= v else (v, u) for u, v in inst.removed + inst.added}


def _multiplicities(g: Multigraph, keys) -> dict:
    return {k: g.multiplicity(*k) for k in keys}


def registry_delta(g: Multigraph, before: dict, after: dict) -> Counter:
    delta: Counter = Counter()
    for key in before:
        c0 = classify(key, before[key], g.h)
        c1 = classify(key, after[key], g.h)
        if c0 != c1:
            if c0 is not None:
                delta[c0] -= 1
            if c1 is not None:
                delta[c1] += 1
    return Counter({k: v for k, v in delta.items() if v})


def _heavy_value(g: Multigraph, key, m: int) -> int:
    c = classify(key, m, g.h)
    return m if c in (HEAVY_MULTI, HEAVY_LOOP) else 0


def _heavy_delta_ok(g: Multigraph, before: dict, after: dict, target) -> bool:
    for key in before:
        if key[1] >= g.h:
            continue
        v0 = _heavy_value(g, key, before[key])
        v1 = _heavy_value(g, key, after[key])
        if key == target:
            if v1 != 0:
                return False
        elif v0 != v1:
            return False
    return True


def _keys_distinct(inst: SwitchingInstance) -> bool:
    return len(set(inst.removed_keys)) == len(inst.removed_keys)


def _stars_simple(g: Multigraph, inst: SwitchingInstance) -> bool:
    for centre, arms in inst.star_checks:
        for x in arms:
            if x == centre or g.multiplicity(centre, x) != 1:
                return False
    return True


def structure_ok(g: Multigraph, s: Structure) -> bool:
    nodes = s.nodes()
    if len(set(nodes)) != len(nodes):
        return False
    if s.c2 < g.h:
        return False
    for x in s.arms1:
        if g.multiplicity(s.c1, x) != 1:
            return False
    for x in s.arms2:
        if g.multiplicity(s.c2, x) != 1:
            return False
    if g.multiplicity(s.c1, s.c2) != s.pattern[0]:
        return False
    for p, (x, y) in enumerate(zip(s.arms1, s.arms2)):
        if g.multiplicity(x, y) != s.pattern[p + 1]:
            return False
    return True


def extra_pairs_ok(g: Multigraph, used: set[int], pairs) -> bool:
    used = set(used)
    for x, y, p, q in pairs:
        if x == y or x in used or y in used:
            return False
        if g.multiplicity(x, y) != 1:
            return False
        if g.multiplicity(p, x) != 0 or g.multiplicity(q, y) != 0:
            return False
        used.add(x)
        used.add(y)
    return True


def _apply_checked(g: Multigraph, inst: SwitchingInstance, check) -> bool:
    """Apply inst; keep it if check(before, after) holds, otherwise revert."""
    keys = _touched(inst)
    before = _multiplicities(g, keys)
    apply(g, inst)
    after = _multiplicities(g, keys)
    if check(before, after):
        return True
    revert(g, inst)
    return False


# -- Phase 1 -------------------------------------------------------------------


def sample_heavy_m_way(g: Multigraph, i: int, j: int, m: int, rng) -> SwitchingInstance:
    removed = [(i, j)] * m
    keys = [(min(i, j), max(i, j), t) for t in range(m)]
    added = []
    vs = []
    for _ in range(m):
        a, b, key = g.sample_ordered_pair(rng)
        removed.append((a, b))
        keys.append(key)
        added.append((i, a))
        added.append((j, b))
        vs.extend((a, b))
    return SwitchingInstance(
        SwitchingKind("heavy_m_way", (m,)),
        (i, j, *vs),
        removed,
        added,
        removed_keys=keys,
        target=(min(i, j), max(i, j)),
    )


def validate_heavy_m_way(g: Multigraph, inst: SwitchingInstance, keep: bool = False) -> bool:
    """Valid iff conditions (a)-(c) hold and only the heavy multi-edge ij disappears.

    With ``keep`` the switching stays applied when valid; otherwise the graph
    is left unchanged.
    """
    i, j = inst.anchors[:2]
    vs = inst.anchors[2:]
    h = g.h
    for k in range(0, len(vs), 2):
        a, b = vs[k], vs[k + 1]
        if a in (i, j) or b in (i, j):
            return False
        if a < h and b < h:
            return False
        if a < h and g.multiplicity(i, a) != 0:
            return False
        if b < h and g.multiplicity(j, b) != 0:
            return False
    if not _keys_distinct(inst):
        return False
    ok = _apply_checked(g, inst, lambda b0, b1: _heavy_delta_ok(g, b0, b1, inst.target))
    if ok and not keep:
        revert(g, inst)
    return ok


def sample_inverse_heavy_1_way(g: Multigraph, i: int, j: int, rng) -> Optional[SwitchingInstance]:
    """None when i or j has no simple neighbour (an f-rejection)."""
    ni = g.simple_neighbors(i)
    nj = g.simple_neighbors(j)
    if not ni or not nj:
        return None
    v1 = ni[rng.below(len(ni))]
    v2 = nj[rng.below(len(nj))]
    return SwitchingInstance(
        SwitchingKind("inverse_heavy_1_way"),
        (i, j, v1, v2),
        [(i, v1), (j, v2)],
        [(i, j), (v1, v2)],
        removed_keys=[(min(i, v1), max(i, v1), 0), (min(j, v2), max(j, v2), 0)],
    )


def validate_inverse_heavy_1_way(g: Multigraph, inst: SwitchingInstance) -> bool:
    _, _, v1, v2 = inst.anchors
    return not (v1 < g.h and v2 < g.h)


# -- Phase 2 ---------------------------------------------------------------------


def sample_heavy_loop(g: Multigraph, i: int, m: int, rng) -> SwitchingInstance:
    removed = [(i, i)] * m
    keys = [(i, i, t) for t in range(m)]
    added = []
    vs = []
    for _ in range(m):
        a, b, key = g.sample_ordered_pair(rng)
        removed.append((a, b))
        keys.append(key)
        added.append((i, a))
        added.append((i, b))
        vs.extend((a, b))
    return SwitchingInstance(
        SwitchingKind("heavy_loop", (m,)),
        (i, *vs),
        removed,
        added,
        removed_keys=keys,
        target=(i, i),
    )


def validate_heavy_loop(g: Multigraph, inst: SwitchingInstance, keep: bool = False) -> bool:
    i = inst.anchors[0]
    vs = inst.anchors[1:]
    h = g.h
    for k in range(0, len(vs), 2):
        a, b = vs[k], vs[k + 1]
        if a == i or b == i:
            return False
        if a < h and b < h:
            return False
        if (a < h and g.multiplicity(i, a) != 0) or (b < h and g.multiplicity(i, b) != 0):
            return False
    if not _keys_distinct(inst):
        return False
    ok = _apply_checked(g, inst, lambda b0, b1: _heavy_delta_ok(g, b0, b1, inst.target))
    if ok and not keep:
        revert(g, inst)
    return ok


# -- Phase 3 ---------------------------------------------------------------------


def sample_l(g: Multigraph, rng) -> SwitchingInstance:
    (v1, _) = g.sample_registry_item(LIGHT_LOOP, rng)
    v2, v4, k1 = g.sample_ordered_pair(rng)
    v3, v5, k2 = g.sample_ordered_pair(rng)
    return SwitchingInstance(
        SwitchingKind("l"),
        (v1, v2, v3, v4, v5),
        [(v1, v1), (v2, v4), (v3, v5)],
        [(v1, v2), (v1, v3), (v4, v5)],
        removed_keys=[(v1, v1, 0), k1, k2],
        target=(v1, v1),
    )


def l_created_ok(g: Multigraph, inst: SwitchingInstance) -> bool:
    v1, v2, v3, v4, v5 = inst.anchors
    if len({v1, v2, v3, v4, v5}) != 5 or v1 < g.h:
        return False
    return (
        g.multiplicity(v1, v2) == 1
        and g.multiplicity(v1, v3) == 1
        and g.multiplicity(v4, v5) == 1
        and g.multiplicity(v2, v4) == 0
        and g.multiplicity(v3, v5) == 0
    )


def validate_l(g: Multigraph, inst: SwitchingInstance, keep: bool = False) -> bool:
    if len(set(inst.anchors)) != 5 or not _keys_distinct(inst):
        return False

    def check(b0, b1):
        return registry_delta(g, b0, b1) == Counter({LIGHT_LOOP: -1}) and l_created_ok(g, inst)

    ok = _apply_checked(g, inst, check)
    if ok and not keep:
        revert(g, inst)
    return ok


# -- Phase 4 ---------------------------------------------------------------------


def _sample_oriented(g: Multigraph, cls: str, rng) -> tuple[int, int]:
    a, b = g.sample_registry_item(cls, rng)
    if rng.below(2):
        a, b = b, a
    return a, b


def sample_t(g: Multigraph, rng) -> SwitchingInstance:
    v1, v2 = _sample_oriented(g, LIGHT_TRIPLE, rng)
    lo, hi = min(v1, v2), max(v1, v2)
    removed = [(v1, v2)] * 3
    keys = [(lo, hi, t) for t in range(3)]
    added = []
    outer1, outer2 = [], []
    for _ in range(3):
        a, b, key = g.sample_ordered_pair(rng)
        removed.append((a, b))
        keys.append(key)
        added.append((v1, a))
        added.append((v2, b))
        outer1.append(a)
        outer2.append(b)
    return SwitchingInstance(
        SwitchingKind("t"),
        (v1, v2, *outer1, *outer2),
        removed,
        added,
        removed_keys=keys,
        structure=Structure(v1, outer1, v2, outer2, (0, 0, 0, 0)),
        target=(lo, hi),
    )


def sample_t_booster(g: Multigraph, kind: str, rng) -> SwitchingInstance:
    if kind == "ta":
        positions = [rng.below(3)]
    elif kind == "tb":
        kept = rng.below(3)
        positions = [p for p in range(3) if p != kept]
    elif kind == "tc":
        positions = [0, 1, 2]
    else:
        raise ValueError(f"unknown booster {kind!r}")
    v1, a, ka = g.sample_ordered_k_star(3, False, rng)
    v2, b, kb = g.sample_ordered_k_star(3, True, rng)
    keys = list(ka) + list(kb)
    checks = [(v1, a), (v2, b)]
    twostars = {}
    for p in positions:
        u, x, kx = g.sample_ordered_k_star(2, False, rng)
        w, y, ky = g.sample_ordered_k_star(2, False, rng)
        twostars[p] = (u, x, w, y)
        keys += kx + ky
        checks += [(u, x), (w, y)]
    removed, added = [], []
    for p in positions:
        u, x, w, y = twostars[p]
        removed += [(v1, a[p]), (v2, b[p]), (u, x[0]), (u, x[1]), (w, y[0]), (w, y[1])]
        added += [(v1, u), (v2, w), (u, w)]
    extra = []
    if kind == "ta":
        p = positions[0]
        extra.append((a[p], b[p], v1, v2))
    elif kind == "tb":
        p, q = positions
        extra.append((a[p], a[q], v1, v1))
        extra.append((b[p], b[q], v2, v2))
    else:
        extra.append((a[0], a[1], v1, v1))
        extra.append((b[0], b[1], v2, v2))
        extra.append((a[2], b[2], v1, v2))
    for p in positions:
        u, x, w, y = twostars[p]
        extra.append((x[0], x[1], u, u))
        extra.append((y[0], y[1], w, w))
    added += [(x, y) for x, y, _, _ in extra]
    arms1 = [twostars[p][0] if p in twostars else a[p] for p in range(3)]
    arms2 = [twostars[p][2] if p in twostars else b[p] for p in range(3)]
    pattern = (0, *(1 if p in twostars else 0 for p in range(3)))
    return SwitchingInstance(
        SwitchingKind(kind, tuple(positions)),
        (v1, v2, *a, *b),
        removed,
        added,
        removed_keys=keys,
        extra_pairs=extra,
        structure=Structure(v1, arms1, v2, arms2, pattern),
        star_checks=checks,
    )


def sample_t_family(g: Multigraph, kind: str, rng) -> SwitchingInstance:
    if kind == "t":
        return sample_t(g, rng)
    return sample_t_booster(g, kind, rng)


def _family_check(g: Multigraph, inst: SwitchingInstance, intended: Counter):
    def check(b0, b1):
        if registry_delta(g, b0, b1) != intended:
            return False
        if not structure_ok(g, inst.structure):
            return False
        return extra_pairs_ok(g, set(inst.structure.nodes()), inst.extra_pairs)

    return check


def validate_t_family(g: Multigraph, inst: SwitchingInstance, keep: bool = False) -> bool:
    if not _keys_distinct(inst) or not _stars_simple(g, inst):
        return False
    if inst.kind.name == "t":
        if inst.structure.c2 < g.h:
            return False
        intended = Counter({LIGHT_TRIPLE: -1})
    else:
        intended = Counter()
    ok = _apply_checked(g, inst, _family_check(g, inst, intended))
    if ok and not keep:
        revert(g, inst)
    return ok


# -- Phase 5 ---------------------------------------------------------------------


def sample_d(g: Multigraph, rng) -> SwitchingInstance:
    v1, v2 = _sample_oriented(g, LIGHT_DOUBLE, rng)
    lo, hi = min(v1, v2), max(v1, v2)
    v3, v4, k1 = g.sample_ordered_pair(rng)
    v5, v6, k2 = g.sample_ordered_pair(rng)
    return SwitchingInstance(
        SwitchingKind("d"),
        (v1, v2, v3, v4, v5, v6),
        [(v1, v2), (v1, v2), (v3, v4), (v5, v6)],
        [(v1, v3), (v1, v5), (v2, v4), (v2, v6)],
        removed_keys=[(lo, hi, 0), (lo, hi, 1), k1, k2],
        structure=Structure(v1, [v3, v5], v2, [v4, v6], (0, 0, 0)),
        target=(lo, hi),
    )


def sample_doublet(g: Multigraph, m1: int, m2: int, m3: int, rng) -> SwitchingInstance:
    k1 = m1 + 2
    v1, a, ka = g.sample_ordered_k_star(k1, False, rng)
    v2, b, kb = g.sample_ordered_k_star(k1, True, rng)
    keys = list(ka) + list(kb)
    checks = [(v1, a), (v2, b)]
    # arm layout: [position-2 arm, m1 arms toward the other centre, position-3 arm]
    pos = {2: 0, 3: m1 + 1}
    a_mid, b_mid = a[1 : m1 + 1], b[1 : m1 + 1]
    active = {}
    for jj, mj in ((2, m2), (3, m3)):
        if mj >= 1:
            u, c, kc = g.sample_ordered_k_star(mj + 1, False, rng)
            w, e, ke = g.sample_ordered_k_star(mj + 1, False, rng)
            active[jj] = (mj, u, c, w, e)
            keys += kc + ke
            checks += [(u, c), (w, e)]
    removed = [(v1, x) for x in a_mid] + [(v2, x) for x in b_mid]
    added = [(v1, v2)] * m1
    extra = []
    c_rest, e_rest = [], []
    for jj, (mj, u, c, w, e) in active.items():
        removed += [(v1, a[pos[jj]]), (v2, b[pos[jj]])]
        removed += [(u, x) for x in c] + [(w, x) for x in e]
        added += [(v1, u), (v2, w)] + [(u, w)] * mj
        extra.append((a[pos[jj]], c[-1], v1, u))
        extra.append((b[pos[jj]], e[-1], v2, w))
        c_rest += [(x, u) for x in c[:-1]]
        e_rest += [(x, w) for x in e[:-1]]
    r = min(m1, len(c_rest))
    for t in range(r):
        cx, cu = c_rest[-1 - t]
        ex, ew = e_rest[-1 - t]
        extra.append((a_mid[t], cx, v1, cu))
        extra.append((b_mid[t], ex, v2, ew))
    for t in range(r, m1):
        extra.append((a_mid[t], b_mid[t], v1, v2))
    for t in range(len(c_rest) - r):
        (cx, cu), (ex, ew) = c_rest[t], e_rest[t]
        extra.append((cx, ex, cu, ew))
    added += [(x, y) for x, y, _, _ in extra]
    arms1 = [active[jj][1] if jj in active else a[pos[jj]] for jj in (2, 3)]
    arms2 = [active[jj][3] if jj in active else b[pos[jj]] for jj in (2, 3)]
    return SwitchingInstance(
        SwitchingKind("doublet", (m1, m2, m3)),
        (v1, v2, *a, *b),
        removed,
        added,
        removed_keys=keys,
        extra_pairs=extra,
        structure=Structure(v1, arms1, v2, arms2, (m1, m2, m3)),
        star_checks=checks,
    )


def sample_d_family(g: Multigraph, kind, rng) -> SwitchingInstance:
    if kind == "d":
        return sample_d(g, rng)
    return sample_doublet(g, *kind, rng)


def validate_d_family(g: Multigraph, inst: SwitchingInstance, keep: bool = False) -> bool:
    if not _keys_distinct(inst) or not _stars_simple(g, inst):
        return False
    if inst.kind.name == "d":
        if inst.structure.c2 < g.h:
            return False
        intended = Counter({LIGHT_DOUBLE: -1})
    else:
        added = sum(1 for x in inst.kind.m if x == 2)
        intended = Counter({LIGHT_DOUBLE: added}) if added else Counter()
    ok = _apply_checked(g, inst, _family_check(g, inst, intended))
    if ok and not keep:
        revert(g, inst)
    return ok


def intended_delta(inst: SwitchingInstance) -> Counter:
    """Registry delta a valid instance of this kind produces (light classes)."""
    name = inst.kind.name
    if name == "l":
        return Counter({LIGHT_LOOP: -1})
    if name == "t":
        return Counter({LIGHT_TRIPLE: -1})
    if name == "d":
        return Counter({LIGHT_DOUBLE: -1})
    if name == "doublet":
        added = sum(1 for x in inst.kind.m if x == 2)
        return Counter({LIGHT_DOUBLE: added}) if added else Counter()
    if name in ("heavy_m_way",):
        return Counter({HEAVY_MULTI: -1})
    if name == "heavy_loop":
        return Counter({HEAVY_LOOP: -1})
    return Counter()
