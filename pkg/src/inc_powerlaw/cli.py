"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 attempt cap reached,
4 a sample fell outside the enumerated class (generator bug).
"""

from __future__ import annotations

import argparse
import sys
import time
from contextlib import contextmanager
from typing import Optional, Sequence

import numpy as np

from .baselines_stats import (
    EnumerationGuardError,
    SampleOutsideEnumeration,
    chi_square_uniformity,
    edge_switch,
    enumerate_graphs,
    havel_hakimi,
)
from .degree_model import (
    GAMMA_THRESHOLD,
    DegreeSequence,
    DegreeSequenceError,
    erdos_gallai_violation,
    load_degree_file,
    sample_powerlaw_sequence,
)
from .multigraph import format_edge_list
from .pipeline import AttemptsExhausted, RunConfig, generate
from .rng import RunRng, run_seed

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_INTEGRITY = 4

BENCH_HEADER = "n,gamma,dmin,rep,method,wall_ms,attempts,switching_steps"
METHODS = ("inc-powerlaw", "edge-switching")


class InputError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _parse_powerlaw(spec: str) -> tuple[int, float, int]:
    try:
        n, gamma, dmin = spec.split(",")
        return int(n), float(gamma), int(dmin)
    except ValueError:
        raise InputError(f"--powerlaw expects N,GAMMA,DMIN, got {spec!r}") from None


def _parse_degrees(text: str) -> DegreeSequence:
    try:
        return DegreeSequence.from_unsorted(int(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise InputError(f"bad degree list {text!r}: {e}") from None


def _sequence_rng(seed: int, *extra: int) -> np.random.Generator:
    # separate stream from the sampler's run seeds
    return np.random.default_rng([seed & (2**64 - 1), 0x5EED, *extra])


def _resolve_input(args) -> tuple[DegreeSequence, float]:
    if getattr(args, "powerlaw", None):
        n, gamma, dmin = _parse_powerlaw(args.powerlaw)
        if args.gamma is not None:
            gamma = args.gamma
        d = sample_powerlaw_sequence(n, gamma, dmin, _sequence_rng(args.seed))
        return d, gamma
    if getattr(args, "degrees", None):
        d = _parse_degrees(args.degrees)
    else:
        try:
            d = load_degree_file(args.degrees_file)
        except OSError as e:
            raise InputError(str(e)) from None
    return d, args.gamma


def _warn_gamma(gamma: float, method: str) -> None:
    if method == "inc-powerlaw" and gamma < GAMMA_THRESHOLD:
        print(
            f"warning: gamma={gamma} is below {GAMMA_THRESHOLD:.5f}; output stays exact "
            "but the expected number of attempts may be very large",
            file=sys.stderr,
        )


def _validate(d: DegreeSequence) -> None:
    bad = erdos_gallai_violation(d.degrees)
    if bad == 0:
        raise InputError("degree sum is odd")
    if bad is not None:
        raise InputError(f"degree sequence is not graphical (Erdos-Gallai fails at k={bad})")


def _sample_edges(d: DegreeSequence, method: str, seed: int, gamma: float, args, index: int = 0):
    """One sample: (edge array, attempts, switching steps, RunStats or None)."""
    if method == "edge-switching":
        rng = RunRng(run_seed(seed, index))
        start = havel_hakimi(d.degrees)
        edges = edge_switch(start, args.swaps_per_edge, rng)
        steps = int(round(args.swaps_per_edge * len(edges)))
        return np.asarray(edges, dtype=np.int64).reshape(-1, 2), 1, steps, None
    cfg = RunConfig(
        master_seed=seed,
        gamma=gamma,
        parallel_runs=getattr(args, "runs", 1),
        max_attempts=args.max_attempts,
    )
    g, rs = generate(d, cfg)
    return g.edge_array(), rs.attempts, rs.accepted_switchings, rs


# -- commands ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    d, gamma = _resolve_input(args)
    if gamma is None:
        raise InputError("--gamma is required with --degrees-file or --degrees")
    _validate(d)
    _warn_gamma(gamma, args.method)
    edges, _, _, rs = _sample_edges(d, args.method, args.seed, gamma, args)
    with _output(args.out) as fh:
        fh.write(format_edge_list(d.n, edges, args.seed))
    if args.stats and rs is not None:
        with open(args.stats, "w") as fh:
            fh.write(rs.to_csv())
    return EXIT_OK


def cmd_test_uniformity(args) -> int:
    d, gamma = _resolve_input(args)
    _validate(d)
    enum = enumerate_graphs(d.degrees)
    samples = []
    for k in range(args.samples):
        s = run_seed(args.seed, k)
        edges, _, _, _ = _sample_edges(d, args.method, s, gamma, args)
        samples.append(edges.tolist())
    try:
        report = chi_square_uniformity(samples, enum)
    except SampleOutsideEnumeration as e:
        _err(str(e))
        return EXIT_INTEGRITY
    print(f"degrees     {','.join(map(str, d.degrees))}")
    print(f"method      {args.method}")
    sys.stdout.write(report.to_text())
    passed = report.p_value >= args.alpha
    print(f"alpha       {args.alpha}")
    print("result      " + ("PASS" if passed else "FAIL"))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    return EXIT_OK if passed else 1


def cmd_enumerate(args) -> int:
    d, _ = _resolve_input(args)
    enum = enumerate_graphs(d.degrees)
    print(enum.count)
    if args.list:
        for g in enum.graphs:
            print(" ".join(f"{u + 1}-{v + 1}" for u, v in g))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    try:
        ns = [int(x) for x in args.n_list.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad --n-list {args.n_list!r}") from None
    capped = False
    _warn_gamma(args.gamma, args.method)
    with _output(args.out) as fh:
        fh.write(BENCH_HEADER + "\n")
        for n in ns:
            for rep in range(args.reps):
                d = sample_powerlaw_sequence(n, args.gamma, args.dmin, _sequence_rng(args.seed, n, rep))
                seed = run_seed(args.seed, rep)
                t0 = time.perf_counter()
                try:
                    _, attempts, steps, _ = _sample_edges(d, args.method, seed, args.gamma, args)
                except AttemptsExhausted as e:
                    capped = True
                    attempts, steps = e.attempts, "NA"
                wall = (time.perf_counter() - t0) * 1000.0
                fh.write(f"{n},{args.gamma},{args.dmin},{rep},{args.method},{wall:.3f},{attempts},{steps}\n")
                fh.flush()
    return EXIT_CAP if capped else EXIT_OK


# -- parser -----------------------------------------------------------------------------


def _add_degree_source(p: argparse.ArgumentParser, powerlaw: bool) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--degrees-file", metavar="PATH")
    src.add_argument("--degrees", metavar="D1,D2,...", help="inline degree list")
    if powerlaw:
        src.add_argument("--powerlaw", metavar="N,GAMMA,DMIN")


def _add_method(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default="inc-powerlaw")
    p.add_argument("--swaps-per-edge", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-attempts", type=int, default=100_000)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inc-powerlaw", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample one simple graph")
    _add_degree_source(g, powerlaw=True)
    _add_method(g)
    g.add_argument("--gamma", type=float, default=None)
    g.add_argument("--runs", type=int, default=1, help="parallel runs")
    g.add_argument("--out", default="-")
    g.add_argument("--stats", metavar="PATH")
    g.set_defaults(func=cmd_generate)

    u = sub.add_parser("test-uniformity", help="chi-square test against full enumeration")
    _add_degree_source(u, powerlaw=False)
    _add_method(u)
    u.add_argument("--gamma", type=float, default=2.88)
    u.add_argument("--samples", type=int, default=50_000)
    u.add_argument("--alpha", type=float, default=0.001)
    u.add_argument("--csv", metavar="PATH")
    u.set_defaults(func=cmd_test_uniformity, runs=1)

    e = sub.add_parser("enumerate", help="count (and list) all graphs of a tiny sequence")
    _add_degree_source(e, powerlaw=False)
    e.add_argument("--list", action="store_true")
    e.set_defaults(func=cmd_enumerate, gamma=None)

    b = sub.add_parser("benchmark", help="time generation over a range of n")
    b.add_argument("--n-list", required=True)
    b.add_argument("--gamma", type=float, default=2.88)
    b.add_argument("--dmin", type=int, default=1)
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--runs", type=int, default=1)
    b.add_argument("--out", default="-")
    _add_method(b)
    b.set_defaults(func=cmd_benchmark)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DegreeSequenceError, EnumerationGuardError) as e:
        _err(str(e))
        return EXIT_INPUT
    except AttemptsExhausted as e:
        _err(str(e))
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
