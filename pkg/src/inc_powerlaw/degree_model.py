"""Degree sequences, graphicality and the sequence-level moments used by the sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

# Above this exponent the interval for delta has a usable midpoint.
GAMMA_THRESHOLD = 2.1 + math.sqrt(61) / 10


class DegreeSequenceError(ValueError):
    pass


def falling_factorial(x: int, k: int) -> int:
    """Return [x]_k = x (x-1) ... (x-k+1); zero when k > x."""
    if k < 0 or x < 0:
        raise ValueError("falling_factorial expects non-negative arguments")
    if k > x:
        return 0
    out = 1
    for i in range(k):
        out *= x - i
    return out


@dataclass(frozen=True)
class DegreeSequence:
    degrees: tuple[int, ...]

    def __init__(self, degrees: Iterable[int]):
        ds = tuple(int(x) for x in degrees)
        if not ds:
            raise DegreeSequenceError("empty degree sequence")
        if any(x < 1 for x in ds):
            raise DegreeSequenceError("degrees must be strictly positive")
        if any(ds[i] < ds[i + 1] for i in range(len(ds) - 1)):
            raise DegreeSequenceError("degrees must be non-increasing")
        object.__setattr__(self, "degrees", ds)

    @classmethod
    def from_unsorted(cls, degrees: Iterable[int]) -> "DegreeSequence":
        return cls(sorted((int(x) for x in degrees), reverse=True))

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def total(self) -> int:
        return sum(self.degrees)

    def __len__(self) -> int:
        return len(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    def __getitem__(self, i):
        return self.degrees[i]


def erdos_gallai_violation(degrees: Sequence[int]) -> Optional[int]:
    """Return None if the (non-increasing) sequence is graphical.

    Otherwise return the failing index: 0 for an odd degree sum, or the first
    k (1-based) whose Erdos-Gallai inequality does not hold.
    """
    d = np.asarray(degrees, dtype=np.int64)
    n = d.size
    if n == 0:
        return None
    if int(d.sum()) % 2:
        return 0
    prefix = np.cumsum(d)
    ks = np.arange(1, n + 1, dtype=np.int64)
    # c[k-1] = number of entries >= k; entries >= k form a prefix of d.
    asc = d[::-1]
    c = n - np.searchsorted(asc, ks, side="left")
    suffix = np.concatenate([np.cumsum(d[::-1])[::-1], [0]])
    start = np.maximum(ks, c)  # first 0-based index past k with d_i < k
    big = np.maximum(c - ks, 0)
    rhs = ks * (ks - 1) + ks * big + suffix[np.minimum(start, n)]
    bad = np.nonzero(prefix > rhs)[0]
    if bad.size:
        return int(bad[0]) + 1
    return None


def check_graphical(d: DegreeSequence | Sequence[int]) -> bool:
    return erdos_gallai_violation(list(d)) is None


def sample_powerlaw_sequence(
    n: int,
    gamma: float,
    d_min: int,
    rng: np.random.Generator,
    max_attempts: int = 1000,
) -> DegreeSequence:
    """Draw i.i.d. degrees with P(i) proportional to i^-gamma on [d_min, n-1]."""
    if n < 2:
        raise DegreeSequenceError("need at least two nodes")
    if not 1 <= d_min < n:
        raise DegreeSequenceError("need 1 <= d_min < n")
    if gamma <= 1:
        raise DegreeSequenceError("gamma must exceed 1")
    support = np.arange(d_min, n, dtype=np.int64)
    w = support.astype(np.float64) ** (-gamma)
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    for _ in range(max_attempts):
        idx = np.searchsorted(cdf, rng.random(n), side="right")
        idx = np.minimum(idx, support.size - 1)
        d = np.sort(support[idx])[::-1]
        if int(d.sum()) % 2 == 0 and erdos_gallai_violation(d) is None:
            return DegreeSequence(d.tolist())
    raise DegreeSequenceError(
        f"no graphical power-law sequence after {max_attempts} attempts "
        f"(n={n}, gamma={gamma}, d_min={d_min})"
    )


def choose_delta(gamma: float) -> float:
    """Exponent used for the heavy-node count h = n^(1 - delta (gamma - 1))."""
    if gamma <= 1:
        raise DegreeSequenceError("gamma must exceed 1")
    if gamma >= 4:
        return 1 / (2 * gamma - 3) + 0.01
    if gamma <= 1.5:
        return 0.0
    lo = 1 / (2 * gamma - 3)
    hi = (2 - 3 / (gamma - 1)) / (4 - gamma)
    # Below the threshold the interval is empty; the midpoint of the two
    # endpoints still varies continuously with gamma.
    delta = (lo + hi) / 2
    return min(max(delta, 0.0), 1 / (gamma - 1))


def heavy_count(n: int, gamma: float) -> int:
    delta = choose_delta(gamma)
    h = math.floor(n ** (1 - delta * (gamma - 1)) + 1e-9)
    return max(0, min(n, h))


@dataclass(frozen=True)
class SequenceStats:
    n: int
    d1: int
    M: tuple[int, int, int, int, int]  # index k = 1..4, M[0] unused
    H: tuple[int, int, int, int, int]
    L: tuple[int, int, int, int, int]
    A2: int
    B: tuple[int, int, int, int]  # B[1..3]
    h: int
    d_h: int
    delta: float
    gamma: float
    epsilon: Fraction
    xi: Fraction

    @property
    def eta_squared(self) -> Fraction:
        M1, M2, H1 = self.M[1], self.M[2], self.H[1]
        return Fraction(M2 * M2 * H1, M1**3) if M1 else Fraction(0)

    @property
    def d_light(self) -> int:
        """Upper bound on every light degree (d_1 when nothing is heavy)."""
        return self.d_h if self.h >= 1 else self.d1

    def is_heavy(self, v: int) -> bool:
        return v < self.h


def _moment_sums(values: np.ndarray) -> list[int]:
    out = [0, 0, 0, 0, 0]
    if values.size == 0:
        return out
    uniq, counts = np.unique(values, return_counts=True)
    for x, c in zip(uniq.tolist(), counts.tolist()):
        for k in range(1, 5):
            out[k] += c * falling_factorial(x, k)
    return out


def compute_stats(d: DegreeSequence, gamma: float, h: Optional[int] = None) -> SequenceStats:
    """Moments, heavy-node parameters and booster budgets for d.

    ``h`` overrides the heavy-node count derived from gamma (used in tests).
    """
    if not gamma > 1 or math.isinf(gamma) or math.isnan(gamma):
        raise DegreeSequenceError("gamma must lie in (1, inf)")
    deg = np.asarray(d.degrees, dtype=np.int64)
    n = d.n
    delta = choose_delta(gamma)
    if h is None:
        h = heavy_count(n, gamma)
    h = max(0, min(n, int(h)))
    M = _moment_sums(deg)
    H = _moment_sums(deg[:h])
    L = [M[k] - H[k] for k in range(5)]
    d1 = int(deg[0])
    A2 = int(deg[: min(d1, n)].sum())
    tail = deg[h : min(n, h + d1)]
    B = [0, 0, 0, 0]
    for k in range(1, 4):
        B[k] = sum(falling_factorial(int(x), k) for x in tail.tolist())
    d_h = int(deg[h - 1]) if h >= 1 else 0
    M1, M2, M3, M4 = M[1], M[2], M[3], M[4]
    epsilon = Fraction(28 * M2 * M2, M1**3)
    xi = Fraction(32 * M2 * M2, M1**3) + Fraction(32 * M3 * M3, M1**4)
    if M2 * L[2] != 0:
        xi += Fraction(36 * M4 * L[4], M2 * L[2] * M1 * M1)
    return SequenceStats(
        n=n,
        d1=d1,
        M=tuple(M),
        H=tuple(H),
        L=tuple(L),
        A2=A2,
        B=tuple(B),
        h=h,
        d_h=d_h,
        delta=delta,
        gamma=gamma,
        epsilon=epsilon,
        xi=xi,
    )


def load_degree_file(path: str | Path) -> DegreeSequence:
    values = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise DegreeSequenceError(f"{path}:{lineno}: not an integer: {line!r}") from None
    if not values:
        raise DegreeSequenceError(f"{path}: no degrees found")
    return DegreeSequence.from_unsorted(values)


def write_degree_file(d: Iterable[int], path: str | Path) -> None:
    Path(path).write_text("".join(f"{x}\n" for x in d))
