"""Harness for switching soundness: apply valid switchings, recount from scratch."""

from __future__ import annotations

from collections import Counter

import numpy as np

from inc_powerlaw.degree_model import DegreeSequence
from inc_powerlaw.multigraph import (
    CLASSES,
    HEAVY_LOOP,
    HEAVY_MULTI,
    GraphError,
    Multigraph,
)
from inc_powerlaw.rng import RunRng
from inc_powerlaw.config_model import sample_pairing
from inc_powerlaw.switchings import (
    DOUBLET_TYPES,
    T_KINDS,
    apply,
    intended_delta,
    revert,
    sample_d_family,
    sample_heavy_loop,
    sample_heavy_m_way,
    sample_inverse_heavy_1_way,
    sample_l,
    sample_t_family,
    validate_d_family,
    validate_heavy_loop,
    validate_heavy_m_way,
    validate_inverse_heavy_1_way,
    validate_l,
    validate_t_family,
)

HEAVY = (HEAVY_MULTI, HEAVY_LOOP)
ALL_KINDS = ("heavy_m_way", "inverse_heavy_1_way", "heavy_loop", "l", *T_KINDS, "d", *DOUBLET_TYPES)


def registry_counts(reg: dict) -> Counter:
    return Counter({c: len(reg[c]) for c in CLASSES})


def degrees_of(g: Multigraph) -> list[int]:
    deg = [0] * g.n
    for u, v in g.pairs():
        deg[u] += 1
        deg[v] += 1
    return deg


def sample_graph(seed: int, n_light: int = 800, heavy=(40, 36, 30, 28)) -> Multigraph:
    """Config-model multigraph with a few heavy hubs and a light tail.

    Large and sparse enough that even the biggest boosters validate often.
    """
    gen = np.random.default_rng(seed)
    while True:
        tail = sorted(gen.integers(3, 9, size=n_light).tolist(), reverse=True)
        d = list(heavy) + tail
        if sum(d) % 2 == 0:
            break
    ds = DegreeSequence(d)
    us, vs = sample_pairing(ds, RunRng(seed))
    return Multigraph(ds.degrees, len(heavy), us, vs)


def _candidate(g: Multigraph, kind, rng):
    if kind == "heavy_m_way":
        items = g.heavy_multi_edges()
        if not items:
            return None
        i, j, m = items[rng.below(len(items))]
        return sample_heavy_m_way(g, i, j, m, rng)
    if kind == "heavy_loop":
        items = g.heavy_loops()
        if not items:
            return None
        i, m = items[rng.below(len(items))]
        return sample_heavy_loop(g, i, m, rng)
    if kind == "inverse_heavy_1_way":
        i, j = rng.sample(g.h, 2)
        if g.multiplicity(i, j) != 0:
            return None
        return sample_inverse_heavy_1_way(g, i, j, rng)
    if kind == "l":
        return sample_l(g, rng) if g.m_l else None
    if kind in T_KINDS:
        if kind == "t" and not g.m_t:
            return None
        return sample_t_family(g, kind, rng)
    if kind == "d" and not g.m_d:
        return None
    return sample_d_family(g, kind, rng)


def _validate(g: Multigraph, kind, inst) -> bool:
    if kind == "heavy_m_way":
        return validate_heavy_m_way(g, inst, keep=True)
    if kind == "heavy_loop":
        return validate_heavy_loop(g, inst, keep=True)
    if kind == "inverse_heavy_1_way":
        if inst is None or not validate_inverse_heavy_1_way(g, inst):
            return False
        apply(g, inst)
        return True
    if kind == "l":
        return validate_l(g, inst, keep=True)
    if kind in T_KINDS:
        return validate_t_family(g, inst, keep=True)
    return validate_d_family(g, inst, keep=True)


def check_kind(kind, wanted: int, seed: int, max_graphs: int = 200, tries: int = 400) -> dict:
    """Apply ``wanted`` valid switchings of ``kind``; compare against full recounts."""
    checked = violations = 0
    examples = []
    for gi in range(max_graphs):
        if checked >= wanted:
            break
        g = sample_graph(seed * 7919 + gi)
        rng = RunRng(seed * 104729 + gi)
        base_deg = list(g.degrees.tolist())
        # invalid candidates revert themselves and valid ones are reverted
        # below, so every candidate starts from this baseline
        before = registry_counts(g.rescan()["registry"])
        for _ in range(tries):
            if checked >= wanted:
                break
            try:
                inst = _candidate(g, kind, rng)
            except GraphError:
                continue
            if inst is None:
                continue
            if not _validate(g, kind, inst):
                continue
            after = registry_counts(g.rescan()["registry"])
            delta = Counter(after)
            delta.subtract(before)
            delta = Counter({k: v for k, v in delta.items() if v})
            want = intended_delta(inst)
            if kind in ("heavy_m_way", "heavy_loop", "inverse_heavy_1_way"):
                # heavy phases are judged on the heavy profile only
                delta = Counter({k: v for k, v in delta.items() if k in HEAVY})
            ok = delta == want and degrees_of(g) == base_deg and g.snapshot() == g.rescan()
            if not ok:
                violations += 1
                if len(examples) < 3:
                    examples.append((str(inst.kind), dict(delta), dict(want)))
            checked += 1
            revert(g, inst)
    return {"kind": kind, "checked": checked, "violations": violations, "examples": examples}
