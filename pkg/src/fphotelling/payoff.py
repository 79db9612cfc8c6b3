"""Closed-form expected payoffs under Poisson faults.

A hinterland of length ``d`` (a region with a server at one end and the
line boundary at the other) is worth ``(1 - exp(-lam d)) / lam`` to its
server: the full length if no fault falls in it, otherwise the distance to
the first fault.  An internal region between two servers is worth
``(1 - exp(-lam d) (1 + lam d / 2)) / lam`` to each of its two servers.

``lam == 0`` is accepted everywhere and returns the fault-free limits
``d`` and ``d / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .faultline import GameConfig, Profile, as_profile

__all__ = [
    "PayoffBreakdown",
    "eh",
    "em",
    "eh_prime",
    "em_prime",
    "em_second",
    "theta",
    "mu",
    "expected_payoff",
    "expected_payoffs",
    "payoff_if_moved",
]


# below this lam*d the truncated Taylor series is exact to double precision
SERIES_X = 1e-4


def _check(lam, d) -> None:
    if np.any(np.asarray(lam) < 0):
        raise ValueError(f"lam must be >= 0, got {lam}")
    if np.any(np.asarray(d) < 0):
        raise ValueError(f"region length must be >= 0, got {d}")


def eh(lam, d):
    """Expected profit from a hinterland of length ``d``."""
    _check(lam, d)
    lam_arr = np.asarray(lam, dtype=float)
    d_arr = np.asarray(d, dtype=float)
    x = lam_arr * d_arr
    safe = np.where(lam_arr > 0, lam_arr, 1.0)
    small = x < SERIES_X
    # lam*d can be subnormal, so switch to the series before dividing by lam
    series = d_arr * (1.0 - x / 2.0 + x * x / 6.0 - x**3 / 24.0)
    out = np.where(small, series, -np.expm1(-x) / safe)
    return out if out.ndim else float(out)


def em(lam, d):
    """Expected profit one server draws from an internal region of length ``d``."""
    _check(lam, d)
    lam_arr = np.asarray(lam, dtype=float)
    d_arr = np.asarray(d, dtype=float)
    x = lam_arr * d_arr
    safe = np.where(lam_arr > 0, lam_arr, 1.0)
    small = x < SERIES_X
    series = d_arr * (0.5 - x * x / 12.0 + x**3 / 24.0)
    # 1 - e^{-x}(1 + x/2) = -expm1(-x) - (x/2) e^{-x}
    out = np.where(small, series, (-np.expm1(-x) - 0.5 * x * np.exp(-x)) / safe)
    return out if out.ndim else float(out)


def eh_prime(lam: float, d: float) -> float:
    return math.exp(-lam * d)


def em_prime(lam: float, d: float) -> float:
    x = lam * d
    return 0.5 * math.exp(-x) * (1.0 + x)


def em_second(lam: float, d: float) -> float:
    return -0.5 * lam * lam * d * math.exp(-lam * d)


def theta(lam: float, t: float, s: float) -> float:
    """Peripheral payoff: hinterland ``t`` plus internal region ``s - t``.

    This is the continuous extension; it ignores colocation at ``t = s``.
    """
    return eh(lam, t) + em(lam, s - t)


def mu(lam: float, t: float, s: float) -> float:
    """Internal payoff at offset ``t`` inside a gap of length ``s`` (continuous extension)."""
    return em(lam, t) + em(lam, s - t)


@dataclass(frozen=True)
class PayoffBreakdown:
    """Expected half-markets of one player and its payoff ``(left + right) / gamma``."""

    left: float
    right: float
    gamma: int
    total: float
    left_peripheral: bool
    right_peripheral: bool


def expected_payoff(config: GameConfig, profile: Profile | Sequence[float], i: int) -> PayoffBreakdown:
    """Closed-form expected payoff of player ``i``.

    Each half-market depends only on the length of the adjacent region and
    on whether that region is a hinterland.  Colocated players share the
    sum equally.
    """
    profile = as_profile(profile)
    if len(profile) != config.n:
        raise ValueError(f"profile has {len(profile)} players, config expects {config.n}")
    i = profile.check_index(i)
    lam = config.lam
    x = profile[i]
    xl = profile.left_neighbor(i)
    xr = profile.right_neighbor(i)
    left = eh(lam, x) if xl is None else em(lam, x - xl)
    right = eh(lam, 1.0 - x) if xr is None else em(lam, xr - x)
    g = profile.gamma(i)
    return PayoffBreakdown(
        left=left,
        right=right,
        gamma=g,
        total=(left + right) / g,
        left_peripheral=xl is None,
        right_peripheral=xr is None,
    )


def expected_payoffs(config: GameConfig, profile: Profile | Sequence[float]) -> np.ndarray:
    """Totals of :func:`expected_payoff` for every player."""
    profile = as_profile(profile)
    return np.array([expected_payoff(config, profile, i).total for i in range(len(profile))])


def payoff_if_moved(lam: float, others: Sequence[float], t) -> np.ndarray:
    """Payoff of a player relocating to each point of ``t`` against fixed ``others``.

    Vectorised over ``t``; exact colocation with an opponent is shared.
    With no opponents the player collects both hinterlands.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    others = np.sort(np.asarray(others, dtype=float))
    if others.size == 0:
        return eh(lam, t) + eh(lam, 1.0 - t)
    lo = np.searchsorted(others, t, side="left")
    hi = np.searchsorted(others, t, side="right")
    ext = np.concatenate([[np.nan], others, [np.nan]])
    xl = ext[lo]  # strictly-left neighbour, nan when none
    xr = ext[hi + 1]
    has_l = lo > 0
    has_r = hi < others.size
    left = np.where(has_l, em(lam, np.where(has_l, t - np.where(has_l, xl, 0.0), 0.0)), eh(lam, t))
    right = np.where(
        has_r, em(lam, np.where(has_r, np.where(has_r, xr, 1.0) - t, 0.0)), eh(lam, 1.0 - t)
    )
    gamma = 1 + (hi - lo)
    return (left + right) / gamma
