"""End-to-end generator: bootstrap, preconditions, five phases, restarts.

Run ``j`` of a generation request draws all of its randomness from
``RunRng(run_seed(master_seed, j))``.  The accepted run is the one with the
smallest index, so the output does not depend on how many worker processes
were used.
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import Optional


from .config_model import sample_pairing
from .degree_model import (
    DegreeSequence,
    DegreeSequenceError,
    SequenceStats,
    compute_stats,
    erdos_gallai_violation,
)
from .multigraph import GraphError, Multigraph, nonsimple_from_pairs
from .rejection_engine import (
    BudgetExceeded,
    Scheduler4,
    Scheduler5,
    bernoulli,
    choose,
    phase1_b,
    phase1_f,
    phase1_f_low,
    phase2_b,
    phase3_b,
    phase4_b,
    phase5_b,
    ratio,
    relaxed_acceptance,
)
from .rng import RunRng, run_seed
from .switchings import (
    apply,
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


class Restart(Exception):
    def __init__(self, site: str):
        super().__init__(site)
        self.site = site


class AttemptsExhausted(RuntimeError):
    def __init__(self, attempts: int, stats: "RunStats"):
        super().__init__(f"no graph accepted after {attempts} attempts")
        self.attempts = attempts
        self.stats = stats


@dataclass
class RunConfig:
    master_seed: int = 1
    gamma: float = 2.88
    parallel_runs: int = 1
    max_attempts: Optional[int] = None
    collect_stats: bool = True
    h: Optional[int] = None  # override of the heavy-node count
    half_shuffle: bool = True

    def __post_init__(self):
        if self.parallel_runs < 1:
            raise ValueError("parallel_runs must be >= 1")


@dataclass
class RunStats:
    attempts: int = 0
    rejections: Counter = field(default_factory=Counter)
    switchings: Counter = field(default_factory=Counter)
    stage_seconds: Counter = field(default_factory=Counter)
    accepted_index: Optional[int] = None
    accepted_switchings: int = 0

    def merge_attempt(self, other: "RunStats") -> None:
        self.attempts += other.attempts
        self.rejections.update(other.rejections)
        self.switchings.update(other.switchings)
        self.stage_seconds.update(other.stage_seconds)

    @property
    def total_rejections(self) -> int:
        return sum(self.rejections.values())

    def to_kv(self) -> str:
        lines = [f"attempts={self.attempts}", f"accepted_index={self.accepted_index}"]
        lines.append(f"switching_steps={self.accepted_switchings}")
        for k in sorted(self.rejections):
            lines.append(f"reject.{k}={self.rejections[k]}")
        for k in sorted(self.switchings):
            lines.append(f"switch.{k}={self.switchings[k]}")
        for k in sorted(self.stage_seconds):
            lines.append(f"seconds.{k}={self.stage_seconds[k]:.6f}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        rows = ["key,value"] + [line.replace("=", ",", 1) for line in self.to_kv().splitlines()]
        return "\n".join(rows) + "\n"


# -- preconditions -----------------------------------------------------------------


def check_preconditions_12_map(ns: dict, h: int, d: DegreeSequence, stats: SequenceStats) -> bool:
    """Phase 1/2 preconditions evaluated on a non-simple map (u <= v) -> m."""
    M1, M2, H1 = stats.M[1], stats.M[2], stats.H[1]
    deg = d.degrees
    multi = [(u, v, m) for (u, v), m in ns.items() if u != v and v < h]
    loops = {u: m for (u, v), m in ns.items() if u == v and u < h}
    if not multi and not loops:
        return True
    W = Counter()
    for u, v, m in multi:
        W[u] += m
        W[v] += m
    lhs_scale = M1**3
    rhs_scale = M2 * M2 * H1

    def within(mw: int, di: int) -> bool:
        # m W <= eta d  with eta^2 = M2^2 H1 / M1^3, compared on squares
        return mw * mw * lhs_scale <= rhs_scale * di * di

    for u, v, m in multi:
        w_uv = W[u] + 2 * loops.get(u, 0) - m
        w_vu = W[v] + 2 * loops.get(v, 0) - m
        if not within(m * w_uv, deg[u]) or not within(m * w_vu, deg[v]):
            return False
    for u, m in loops.items():
        if not within(m * W[u], deg[u]):
            return False
    if sum(m for _, _, m in multi) * M1 * M1 > 4 * M2 * M2:
        return False
    if sum(loops.values()) * M1 > 4 * M2:
        return False
    return True


def check_preconditions_12(g: Multigraph, d: DegreeSequence, stats: SequenceStats) -> bool:
    return check_preconditions_12_map(dict(g.nonsimple_items()), g.h, d, stats)


def check_preconditions_345(g: Multigraph, stats: SequenceStats) -> bool:
    M1, M2, M3 = stats.M[1], stats.M[2], stats.M[3]
    L2, L3 = stats.L[2], stats.L[3]
    if g.other_bad or g.heavy_multi_edges() or g.heavy_loops():
        return False
    if g.m_l * M1 > 4 * L2:
        return False
    if g.m_t * M1**3 > 2 * L3 * M3:
        return False
    if g.m_d * M1 * M1 > 4 * L2 * M2:
        return False
    return True


# -- phases -------------------------------------------------------------------------


def _coin(p, rng, site: str) -> None:
    if not bernoulli(p, rng):
        raise Restart(site)


def phase1(g: Multigraph, d: DegreeSequence, stats: SequenceStats, rng, rs: RunStats) -> None:
    deg = d.degrees
    for i, j, m in g.heavy_multi_edges():
        inst = sample_heavy_m_way(g, i, j, m, rng)
        if not validate_heavy_m_way(g, inst, keep=True):
            raise Restart("f-reject-phase1")
        rs.switchings[str(inst.kind)] += 1
        D_i = deg[i] - g.heavy_weight(i) - 2 * g.multiplicity(i, i)
        D_j = deg[j] - g.heavy_weight(j) - 2 * g.multiplicity(j, j)
        Y1 = g.heavy_simple_neighbor_count(i)
        Y2 = g.heavy_simple_neighbor_count(j)
        q = phase1_b(D_i, D_j, Y1, Y2, m, g.h)
        _coin(ratio(q["b_low"], q["b"]), rng, "b-reject-phase1")
        f_low = phase1_f_low(stats)
        if f_low <= 0:
            raise Restart("phase1-f-low")
        if bernoulli(Fraction(f_low, f_low + q["b_bar1"]), rng):
            continue
        inv = sample_inverse_heavy_1_way(g, i, j, rng)
        if inv is None or not validate_inverse_heavy_1_way(g, inv):
            raise Restart("f-reject-phase1-inverse")
        apply(g, inv)
        rs.switchings[str(inv.kind)] += 1
        f = phase1_f(g, i, j, stats)
        _coin(ratio(f_low, f["f"]), rng, "b-reject-phase1-inverse")
    assert not g.heavy_multi_edges()


def phase2(g: Multigraph, d: DegreeSequence, stats: SequenceStats, rng, rs: RunStats) -> None:
    for i, m in g.heavy_loops():
        inst = sample_heavy_loop(g, i, m, rng)
        if not validate_heavy_loop(g, inst, keep=True):
            raise Restart("f-reject-phase2")
        rs.switchings[str(inst.kind)] += 1
        Y = g.heavy_simple_neighbor_count(i)
        q = phase2_b(d.degrees[i], Y, m, g.h)
        _coin(ratio(q["b_low"], q["b"]), rng, "b-reject-phase2")
    assert not g.heavy_loops()


def phase3(g: Multigraph, stats: SequenceStats, rng, rs: RunStats) -> None:
    while g.m_l:
        inst = sample_l(g, rng)
        if not validate_l(g, inst, keep=True):
            raise Restart("f-reject-phase3")
        rs.switchings["l"] += 1
        v1, v2, v3 = inst.anchors[:3]
        q = phase3_b(g, (v1, v2, v3), stats)
        p = relaxed_acceptance([q["b_empty"], q["b_star"]], [q["b0_low"], q["b1_low"]])
        _coin(p, rng, "b-reject-phase3")


def phase4(g: Multigraph, stats: SequenceStats, rng, rs: RunStats) -> None:
    if not g.m_t:
        return
    m_d, m_l = g.m_d, g.m_l
    sched = Scheduler4(stats, g.m_t, m_d)
    while g.m_t:
        kind = choose(sched.weights(), rng)
        if kind is None:
            raise Restart("phase4-type")
        try:
            inst = sample_t_family(g, kind, rng)
        except GraphError:  # empty candidate set
            raise Restart("f-reject-phase4") from None
        if not validate_t_family(g, inst, keep=True):
            raise Restart("f-reject-phase4")
        rs.switchings[kind] += 1
        s = inst.structure
        q = phase4_b(g, s.c1, s.arms1, inst.extra_pairs, stats, s.nodes())
        _coin(
            relaxed_acceptance([q["b_empty"], q["b_star"]], [q["b0_low"], q["b1_low"]]),
            rng,
            "b-reject-phase4",
        )
        _coin(relaxed_acceptance(q["pairs"], q["pairs_low"]), rng, "b-reject-phase4-pairs")
        assert g.m_d == m_d and g.m_l == m_l
        if kind == "t" and g.m_t:
            try:
                sched.update(g.m_t)
            except BudgetExceeded:
                raise Restart("scheduler-budget") from None


def phase5(g: Multigraph, stats: SequenceStats, rng, rs: RunStats) -> None:
    if not g.m_d:
        return
    sched = Scheduler5(stats, g.m_d)
    while g.m_d:
        kind = choose(sched.weights(), rng)
        if kind is None:
            raise Restart("phase5-type")
        try:
            inst = sample_d_family(g, kind, rng)
        except GraphError:  # empty candidate set
            raise Restart("f-reject-phase5") from None
        before = g.m_d
        if not validate_d_family(g, inst, keep=True):
            raise Restart("f-reject-phase5")
        rs.switchings[str(inst.kind)] += 1
        s = inst.structure
        q = phase5_b(g, s.c1, s.arms1, inst.extra_pairs, stats, s.nodes())
        _coin(
            relaxed_acceptance([q["b_empty"], q["b_star"]], [q["b0_low"], q["b1_low"]]),
            rng,
            "b-reject-phase5",
        )
        _coin(relaxed_acceptance(q["pairs"], q["pairs_low"]), rng, "b-reject-phase5-pairs")
        assert g.m_t == 0 and g.m_l == 0
        if g.m_d != before and g.m_d:
            try:
                sched.update(g.m_d)
            except BudgetExceeded:
                raise Restart("scheduler-budget") from None


# -- single run -----------------------------------------------------------------------


def run_once(d: DegreeSequence, stats: SequenceStats, rng: RunRng, rs: RunStats, half_shuffle: bool = True):
    """One attempt.  Returns the simple graph or raises Restart."""
    t0 = time.perf_counter()
    us, vs = sample_pairing(d, rng, half_shuffle)
    t1 = time.perf_counter()
    rs.stage_seconds["pairing"] += t1 - t0
    ns = nonsimple_from_pairs(d.n, us, vs)
    if stats.M[2] < stats.M[1]:
        if ns:
            raise Restart("fast-path-nonsimple")
        g = Multigraph(d.degrees, stats.h, us, vs)
        rs.stage_seconds["build"] += time.perf_counter() - t1
        return g
    if not check_preconditions_12_map(ns, stats.h, d, stats):
        raise Restart("precondition-12")
    g = Multigraph(d.degrees, stats.h, us, vs)
    t2 = time.perf_counter()
    rs.stage_seconds["build"] += t2 - t1
    if ns:
        phase1(g, d, stats, rng, rs)
        phase2(g, d, stats, rng, rs)
        if not check_preconditions_345(g, stats):
            raise Restart("precondition-345")
        phase3(g, stats, rng, rs)
        assert g.m_l == 0
        phase4(g, stats, rng, rs)
        assert g.m_t == 0
        phase5(g, stats, rng, rs)
        assert g.is_simple()
    rs.stage_seconds["switching"] += time.perf_counter() - t2
    return g


def attempt(d: DegreeSequence, stats: SequenceStats, master_seed: int, index: int, half_shuffle: bool = True):
    """Run attempt ``index``: (graph or None, RunStats of this attempt)."""
    rs = RunStats(attempts=1)
    rng = RunRng(run_seed(master_seed, index))
    try:
        g = run_once(d, stats, rng, rs, half_shuffle)
    except Restart as r:
        rs.rejections[r.site] += 1
        return None, rs
    rs.accepted_switchings = sum(rs.switchings.values())
    return g, rs


def _prepare(d: DegreeSequence, cfg: RunConfig) -> SequenceStats:
    if d.total % 2:
        raise DegreeSequenceError("degree sum is odd")
    bad = erdos_gallai_violation(d.degrees)
    if bad is not None:
        raise DegreeSequenceError(f"degree sequence is not graphical (Erdos-Gallai fails at k={bad})")
    return compute_stats(d, cfg.gamma, h=cfg.h)


def generate(d: DegreeSequence, cfg: Optional[RunConfig] = None):
    """Sequential generation: (Multigraph, RunStats)."""
    cfg = cfg or RunConfig()
    if cfg.parallel_runs > 1:
        return parallel_generate(d, cfg)
    stats = _prepare(d, cfg)
    total = RunStats()
    for j in count():
        if cfg.max_attempts is not None and j >= cfg.max_attempts:
            raise AttemptsExhausted(j, total)
        g, rs = attempt(d, stats, cfg.master_seed, j, cfg.half_shuffle)
        total.merge_attempt(rs)
        if g is not None:
            total.accepted_index = j
            total.accepted_switchings = rs.accepted_switchings
            return g, total


# -- inter-run parallelism ---------------------------------------------------------------

_WORKER: dict = {}


def _worker_init(degrees, stats, master_seed, half_shuffle):
    _WORKER["d"] = DegreeSequence(degrees)
    _WORKER["stats"] = stats
    _WORKER["seed"] = master_seed
    _WORKER["half"] = half_shuffle


def _worker_run(index: int):
    g, rs = attempt(_WORKER["d"], _WORKER["stats"], _WORKER["seed"], index, _WORKER["half"])
    edges = None if g is None else g.edge_array()
    return index, edges, rs


def parallel_generate(d: DegreeSequence, cfg: RunConfig):
    """Independent runs on a process pool; the smallest accepted index wins."""
    stats = _prepare(d, cfg)
    if cfg.parallel_runs == 1:
        return generate(d, cfg)
    results: dict[int, tuple] = {}
    next_index = 0
    limit = cfg.max_attempts
    best: Optional[int] = None
    with ProcessPoolExecutor(
        max_workers=cfg.parallel_runs,
        initializer=_worker_init,
        initargs=(d.degrees, stats, cfg.master_seed, cfg.half_shuffle),
    ) as pool:
        pending = set()
        while True:
            while len(pending) < cfg.parallel_runs:
                if best is not None and next_index >= best:
                    break
                if limit is not None and next_index >= limit:
                    break
                pending.add(pool.submit(_worker_run, next_index))
                next_index += 1
            if not pending:
                break
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                idx, edges, rs = fut.result()
                results[idx] = (edges, rs)
                if edges is not None and (best is None or idx < best):
                    best = idx
            if best is not None and all(k in results for k in range(best)):
                for fut in pending:
                    fut.cancel()
                break
    total = RunStats()
    if best is None:
        for k in sorted(results):
            total.merge_attempt(results[k][1])
        raise AttemptsExhausted(len(results), total)
    for k in range(best + 1):
        total.merge_attempt(results[k][1])
    edges, rs = results[best]
    total.accepted_index = best
    total.accepted_switchings = rs.accepted_switchings
    g = Multigraph(d.degrees, stats.h, edges[:, 0], edges[:, 1])
    return g, total
