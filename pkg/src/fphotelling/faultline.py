"""Poisson line faults: sampling, realized markets and realized payoffs.

This module is the Monte Carlo side of the package.  It knows nothing about
the closed-form expectations in :mod:`fphotelling.payoff`; it only samples
fault sets and applies the market rules to each realization, so it can be
used as an independent check of every closed form.

Players are indexed from 0 in the sorted order of the profile.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "GameConfig",
    "Profile",
    "FaultSet",
    "Market",
    "as_profile",
    "sample_faults",
    "sample_fault_batch",
    "fault_batches",
    "realized_market",
    "realized_payoff",
    "realized_payoff_batch",
    "count_uniform_faults",
    "PayoffEstimate",
    "monte_carlo_payoffs",
]

DEFAULT_SHARD = 100_000


@dataclass(frozen=True)
class GameConfig:
    """Player count ``n`` and Poisson fault rate ``lam``.

    ``lam == 0`` is allowed and means the fault-free game.
    """

    n: int
    lam: float

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (self.lam >= 0.0) or math.isinf(self.lam):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True)
class Profile:
    """Server positions in [0, 1], kept sorted ascending.

    Colocation uses exact float equality; snap positions first if you need
    a tolerance.
    """

    positions: tuple[float, ...]

    def __post_init__(self) -> None:
        pos = tuple(sorted(float(p) for p in self.positions))
        if not pos:
            raise ValueError("profile must contain at least one position")
        if any(not (0.0 <= p <= 1.0) for p in pos):
            raise ValueError(f"positions must lie in [0, 1]: {pos}")
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)

    def __getitem__(self, i: int) -> float:
        return self.positions[i]

    def __iter__(self) -> Iterator[float]:
        return iter(self.positions)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float)

    def check_index(self, i: int) -> int:
        if not isinstance(i, (int, np.integer)) or not 0 <= i < len(self.positions):
            raise IndexError(f"player index {i!r} out of range for {len(self.positions)} players")
        return int(i)

    def gamma(self, i: int) -> int:
        """Number of servers at player ``i``'s location (itself included)."""
        x = self.positions[self.check_index(i)]
        return bisect_right(self.positions, x) - bisect_left(self.positions, x)

    def left_neighbor(self, i: int) -> float | None:
        """Nearest server position strictly left of player ``i``, if any."""
        x = self.positions[self.check_index(i)]
        k = bisect_left(self.positions, x)
        return self.positions[k - 1] if k > 0 else None

    def right_neighbor(self, i: int) -> float | None:
        x = self.positions[self.check_index(i)]
        k = bisect_right(self.positions, x)
        return self.positions[k] if k < len(self.positions) else None

    def replace(self, i: int, x: float) -> "Profile":
        """Profile with player ``i`` moved to ``x`` (re-sorted)."""
        pos = list(self.positions)
        pos[self.check_index(i)] = x
        return Profile(tuple(pos))

    def without(self, i: int) -> tuple[float, ...]:
        pos = list(self.positions)
        del pos[self.check_index(i)]
        return tuple(pos)


def as_profile(profile: Profile | Sequence[float]) -> Profile:
    return profile if isinstance(profile, Profile) else Profile(tuple(profile))


@dataclass(frozen=True)
class FaultSet:
    """Realized fault points, strictly increasing inside (0, 1)."""

    points: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        pts = tuple(float(p) for p in self.points)
        if any(not (0.0 < p < 1.0) for p in pts):
            raise ValueError(f"fault points must lie in (0, 1): {pts}")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError(f"fault points must be strictly increasing: {pts}")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[float]:
        return iter(self.points)


@dataclass(frozen=True)
class Market:
    """Segment [left, right] of clients served from one location."""

    left: float
    right: float

    @property
    def size(self) -> float:
        return self.right - self.left


def sample_faults(lam: float, rng: np.random.Generator) -> FaultSet:
    """Draw one fault set on [0, 1] by cumulating Exp(lam) inter-arrival gaps."""
    if lam < 0.0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if lam == 0.0:
        return FaultSet()
    scale = 1.0 / lam
    pts = []
    t = rng.exponential(scale)
    while t < 1.0:
        if t > 0.0:
            pts.append(t)
        t += rng.exponential(scale)
    return FaultSet(tuple(pts))


def sample_fault_batch(lam: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` independent fault sets at once.

    Returns an array of shape ``(size, k)``; row ``r`` holds the sorted
    faults of sample ``r`` followed by ``inf`` padding.  Arrival times are
    cumulative exponential gaps, extended column-wise until every row has
    passed 1.
    """
    if lam < 0.0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if lam == 0.0 or size == 0:
        return np.full((size, 0), np.inf)
    scale = 1.0 / lam
    width = int(lam + 6.0 * math.sqrt(lam) + 8)
    arrivals = np.cumsum(rng.exponential(scale, size=(size, width)), axis=1)
    while True:
        short = arrivals[:, -1] < 1.0
        if not short.any():
            break
        extra = np.full((size, width), np.inf)
        rows = np.flatnonzero(short)
        extra[rows] = arrivals[rows, -1:] + np.cumsum(
            rng.exponential(scale, size=(rows.size, width)), axis=1
        )
        arrivals = np.hstack([arrivals, extra])
    arrivals[arrivals >= 1.0] = np.inf
    keep = np.isfinite(arrivals).any(axis=0)
    return arrivals[:, : int(keep.sum())] if keep.any() else arrivals[:, :0]


def fault_batches(
    lam: float, samples: int, seed: int, shard: int = DEFAULT_SHARD
) -> Iterator[np.ndarray]:
    """Yield fault batches totalling ``samples`` rows.

    Each shard gets its own stream spawned from ``seed``, so the output
    depends only on (lam, samples, seed, shard) and shards may be
    evaluated in any order or in parallel.
    """
    if samples < 0:
        raise ValueError("samples must be >= 0")
    n_shards = max(1, -(-samples // shard))
    children = np.random.SeedSequence(seed).spawn(n_shards)
    remaining = samples
    for child in children:
        m = min(shard, remaining)
        if m <= 0:
            break
        yield sample_fault_batch(lam, m, np.random.default_rng(child))
        remaining -= m


def count_uniform_faults(lam: float, rng: np.random.Generator) -> FaultSet:
    """Alternative sampler: Poisson count, then that many uniform points.

    Kept as a cross-check of :func:`sample_faults`; both produce the same
    process.
    """
    k = rng.poisson(lam) if lam > 0 else 0
    pts = np.sort(rng.uniform(0.0, 1.0, size=k))
    pts = pts[(pts > 0.0) & (pts < 1.0)]
    return FaultSet(tuple(np.unique(pts)))


def realized_market(profile: Profile | Sequence[float], i: int, faults: FaultSet) -> Market:
    """Market of player ``i`` under one fault realization.

    A fault blocks clients on the far side from reaching a server.  Without
    a fault between two neighbors the clients split at the midpoint.  A
    fault exactly at a server position blocks nothing.
    """
    profile = as_profile(profile)
    i = profile.check_index(i)
    x = profile[i]
    pts = faults.points
    k = bisect_left(pts, x)
    f_left = pts[k - 1] if k > 0 else -math.inf
    k = bisect_right(pts, x)
    f_right = pts[k] if k < len(pts) else math.inf

    xl = profile.left_neighbor(i)
    if xl is None:
        left = f_left if f_left > -math.inf else 0.0
    else:
        left = f_left if f_left > xl else 0.5 * (xl + x)

    xr = profile.right_neighbor(i)
    if xr is None:
        right = f_right if f_right < math.inf else 1.0
    else:
        right = f_right if f_right < xr else 0.5 * (x + xr)
    return Market(left, right)


def realized_payoff(profile: Profile | Sequence[float], i: int, faults: FaultSet) -> float:
    """Market size of player ``i`` shared among its colocated servers."""
    profile = as_profile(profile)
    return realized_market(profile, i, faults).size / profile.gamma(i)


def realized_payoff_batch(profile: Profile | Sequence[float], faults: np.ndarray) -> np.ndarray:
    """Realized payoffs of every player for a batch of fault sets.

    ``faults`` is an array as returned by :func:`sample_fault_batch`.
    Returns shape ``(samples, n)``.
    """
    profile = as_profile(profile)
    faults = np.asarray(faults, dtype=float)
    s = faults.shape[0]
    rows = np.arange(s)
    padded = np.hstack([np.full((s, 1), -np.inf), faults, np.full((s, 1), np.inf)])
    out = np.empty((s, len(profile)))
    done: dict[float, np.ndarray] = {}
    for i, x in enumerate(profile):
        if x in done:
            out[:, i] = done[x]
            continue
        f_left = padded[rows, (faults < x).sum(axis=1)]
        f_right = padded[rows, (faults <= x).sum(axis=1) + 1]
        xl = profile.left_neighbor(i)
        xr = profile.right_neighbor(i)
        if xl is None:
            left = np.where(np.isfinite(f_left), f_left, 0.0)
        else:
            left = np.where(f_left > xl, f_left, 0.5 * (xl + x))
        if xr is None:
            right = np.where(np.isfinite(f_right), f_right, 1.0)
        else:
            right = np.where(f_right < xr, f_right, 0.5 * (x + xr))
        done[x] = (right - left) / profile.gamma(i)
        out[:, i] = done[x]
    return out


@dataclass(frozen=True)
class PayoffEstimate:
    """Per-player Monte Carlo means and standard errors (None when samples < 2)."""

    mean: np.ndarray
    stderr: np.ndarray | None
    samples: int


def monte_carlo_payoffs(
    profile: Profile | Sequence[float], lam: float, samples: int, seed: int, shard: int = DEFAULT_SHARD
) -> PayoffEstimate:
    """Average realized payoffs of every player over ``samples`` fault sets."""
    profile = as_profile(profile)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    total = np.zeros(len(profile))
    total_sq = np.zeros(len(profile))
    for batch in fault_batches(lam, samples, seed, shard):
        pay = realized_payoff_batch(profile, batch)
        total += pay.sum(axis=0)
        total_sq += (pay * pay).sum(axis=0)
    mean = total / samples
    if samples < 2:
        return PayoffEstimate(mean, None, samples)
    var = np.maximum(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return PayoffEstimate(mean, np.sqrt(var / samples), samples)
