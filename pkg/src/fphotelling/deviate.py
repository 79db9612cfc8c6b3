"""Local optima, best responses and equilibrium verification.

The analytic best response removes the deviating player and evaluates the
single optimal point of every region the remaining players leave open:
one root find per hinterland, the midpoint of every internal gap.  The
grid oracle ignores all of that structure and simply scans candidate
positions with the closed-form payoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._numerics import DEFAULT_TOLERANCES, SolverTolerances, golden_section_max, safe_newton
from .canonical import LN2, CanonicalPair
from .faultline import GameConfig, Profile, as_profile
from .payoff import eh, em, expected_payoff, payoff_if_moved, theta

__all__ = [
    "DeviationReport",
    "EquilibriumCheck",
    "hinterland_optimum",
    "internal_optimum",
    "best_response",
    "grid_best_response",
    "verify_equilibrium",
    "internal_hinterland_margin",
    "internal_hinterland_test",
]

GRID_POINTS = 10_001
DEFAULT_TOL = 1e-9
TIE_TOL = 1e-13


@dataclass(frozen=True)
class DeviationReport:
    """Best unilateral move of one player.

    ``attained`` is False when ``best_payoff`` is a supremum approached
    next to an opponent but not reached (moving onto the opponent would
    share the market instead).
    """

    player: int
    best_point: float
    best_payoff: float
    current_payoff: float
    gain: float
    attained: bool = True


def _check_region(s: float) -> None:
    if not 0.0 <= s <= 1.0 + 1e-15:
        raise ValueError(f"region length must be in [0, 1], got {s}")


def hinterland_optimum(
    lam: float, s: float, tol: SolverTolerances = DEFAULT_TOLERANCES
) -> tuple[float, float]:
    """Best distance ``t`` from the boundary for a peripheral player whose neighbour sits at ``s``.

    Returns ``(t_star, theta(t_star, s))``.  When ``lam s <= ln 2`` the
    payoff increases all the way to the neighbour and ``t_star = s``.
    """
    _check_region(s)
    if lam < 0.0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if lam * s <= LN2:
        return s, theta(lam, s, s)

    def dtheta(t: float) -> float:
        return math.exp(-lam * t) - 0.5 * math.exp(-lam * (s - t)) * (1.0 + lam * (s - t))

    def d2theta(t: float) -> float:
        return -lam * math.exp(-lam * t) - 0.5 * lam * lam * (s - t) * math.exp(-lam * (s - t))

    t_star = safe_newton(dtheta, d2theta, 0.0, s, tol)
    return t_star, theta(lam, t_star, s)


def internal_optimum(lam: float, s: float) -> tuple[float, float]:
    """Midpoint of a gap of length ``s`` and the payoff ``2 em(s/2)`` it earns."""
    _check_region(s)
    return 0.5 * s, 2.0 * em(lam, 0.5 * s)


def _candidates(lam: float, others: Sequence[float], n: int) -> list[tuple[float, float, bool]]:
    """(point, payoff, attained) for each region optimum left open by ``others``."""
    if not others:
        # alone on the line: both sides are hinterlands, centre is optimal
        return [(0.5, 2.0 * eh(lam, 0.5), True)]
    uniq = sorted(set(others))
    out: list[tuple[float, float, bool]] = []
    s = uniq[0]
    if s > 0.0:
        t, p = hinterland_optimum(lam, s)
        out.append((t, p, t < s))
    for a, b in zip(uniq, uniq[1:]):
        t, p = internal_optimum(lam, b - a)
        out.append((a + t, p, True))
    s = 1.0 - uniq[-1]
    if s > 0.0:
        t, p = hinterland_optimum(lam, s)
        out.append((1.0 - t, p, t < s))
    if n == 2:
        # two players: sitting on the opponent is a genuine option
        for u in uniq:
            out.append((u, float(payoff_if_moved(lam, others, u)[0]), True))
    return out


def _pick(cands: list[tuple[float, float, bool]]) -> tuple[float, float, bool]:
    best = max(p for _, p, _ in cands)
    ties = [c for c in cands if c[1] >= best - TIE_TOL]
    return min(ties, key=lambda c: c[0])


def best_response(config: GameConfig, profile: Profile | Sequence[float], i: int) -> DeviationReport:
    """Analytic best response of player ``i`` against the others."""
    profile = as_profile(profile)
    i = profile.check_index(i)
    current = expected_payoff(config, profile, i).total
    others = profile.without(i)
    cands = [(profile[i], current, True)] + _candidates(config.lam, others, config.n)
    point, payoff, attained = _pick(cands)
    return DeviationReport(i, point, payoff, current, payoff - current, attained)


def grid_best_response(
    config: GameConfig, profile: Profile | Sequence[float], i: int, points: int = GRID_POINTS
) -> DeviationReport:
    """Best response found by scanning a uniform grid, then refining the best cell.

    Refinement is a golden-section search restricted to the cell around
    the grid argmax and to the open region between opponents.
    """
    profile = as_profile(profile)
    i = profile.check_index(i)
    lam = config.lam
    current = expected_payoff(config, profile, i).total
    others = np.sort(np.asarray(profile.without(i), dtype=float))
    grid = np.linspace(0.0, 1.0, points)
    vals = payoff_if_moved(lam, others, grid)
    k = int(np.argmax(vals))
    best_x, best_p = float(grid[k]), float(vals[k])

    x = grid[k]
    if not np.any(others == x):
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, points - 1)]
        left_opp = others[others < x]
        right_opp = others[others > x]
        if left_opp.size:
            lo = max(lo, left_opp[-1])
        if right_opp.size:
            hi = min(hi, right_opp[0])
        if hi > lo:
            f = lambda t: float(payoff_if_moved(lam, others, t)[0])
            xr = golden_section_max(f, lo, hi, tol=1e-12)
            pr = f(xr)
            if pr > best_p:
                best_x, best_p = xr, pr
    if current >= best_p:
        best_x, best_p = profile[i], current
    return DeviationReport(i, best_x, best_p, current, best_p - current, True)


@dataclass(frozen=True)
class EquilibriumCheck:
    is_equilibrium: bool
    reports: tuple[DeviationReport, ...]
    grid_is_equilibrium: bool | None = None
    grid_reports: tuple[DeviationReport, ...] | None = None

    @property
    def max_gain(self) -> float:
        return max(r.gain for r in self.reports)

    def __bool__(self) -> bool:
        return self.is_equilibrium


def verify_equilibrium(
    config: GameConfig,
    profile: Profile | Sequence[float],
    tol: float = DEFAULT_TOL,
    grid_oracle: bool = False,
    grid_points: int = GRID_POINTS,
) -> EquilibriumCheck:
    """Check that no player gains more than ``tol`` by moving.

    With ``grid_oracle`` the verdict is recomputed independently by grid
    scan; both verdicts are returned.
    """
    if not tol > 0.0:
        raise ValueError("tol must be > 0")
    profile = as_profile(profile)
    if len(profile) != config.n:
        raise ValueError(f"profile has {len(profile)} players, config expects {config.n}")
    reports = tuple(best_response(config, profile, i) for i in range(config.n))
    ok = max(r.gain for r in reports) <= tol
    if not grid_oracle:
        return EquilibriumCheck(ok, reports)
    grid = tuple(grid_best_response(config, profile, i, grid_points) for i in range(config.n))
    return EquilibriumCheck(ok, reports, max(r.gain for r in grid) <= tol, grid)


def internal_hinterland_margin(pair: CanonicalPair, lam: float | None = None) -> float:
    """Payoff of an internal player minus its best payoff inside a hinterland."""
    lam = pair.lam if lam is None else lam
    _, hinter = hinterland_optimum(lam, pair.H)
    return 2.0 * em(lam, pair.M) - hinter


def internal_hinterland_test(pair: CanonicalPair, lam: float | None = None) -> bool:
    """True when no internal player of the canonical profile gains by moving to a hinterland."""
    return internal_hinterland_margin(pair, lam) >= 0.0
