"""Client-side costs: transportation cost, price of stability/anarchy, disconnection.

Transportation costs are integrated exactly; every piece of the line is a
hinterland (cost ``h**2 / 2``) or a gap between servers (cost ``g**2 / 4``).

The probability that a client at ``y`` is cut off from every server is
``(1 - exp(-lam a)) (1 - exp(-lam b))`` with ``a`` and ``b`` its distances
to the nearest server on each side (a missing side contributes 1), because
fault counts on disjoint intervals are independent.  Integrating that per
region gives the expected disconnected fraction in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import minimize

from ._numerics import golden_section_max
from .canonical import nash_equilibrium, ne_exists
from .faultline import FaultSet, GameConfig, Profile, as_profile, fault_batches

__all__ = [
    "NoEquilibrium",
    "UnsupportedN",
    "AccessCostConfig",
    "AccessCost",
    "EfficiencyReport",
    "Estimate",
    "c_free",
    "canonical_c_free",
    "social_optimum",
    "pos_poa",
    "faultfree_reference",
    "disconnected_fraction",
    "disconnected_fraction_batch",
    "access_cost",
    "expected_disconnected_fraction",
    "optimal_dc_profile",
    "faultfree_family_ok",
    "faultfree_ne_profile",
]


class NoEquilibrium(ValueError):
    """The game has no pure Nash equilibrium."""


class UnsupportedN(ValueError):
    """No fault-free equilibrium exists for this player count."""


def _unique_sorted(profile: Profile | Sequence[float]) -> list[float]:
    profile = as_profile(profile)
    return sorted(set(profile.positions))


def c_free(profile: Profile | Sequence[float]) -> float:
    """Fault-free transportation cost: integral of distance to the nearest server."""
    u = _unique_sorted(profile)
    cost = 0.5 * u[0] ** 2 + 0.5 * (1.0 - u[-1]) ** 2
    cost += sum(0.25 * (b - a) ** 2 for a, b in zip(u, u[1:]))
    return cost


def canonical_c_free(H: float, M: float, n: int) -> float:
    return H * H + 0.25 * (n - 1) * M * M


def social_optimum(n: int) -> tuple[Profile, float]:
    """Equally spaced profile ``(2i - 1) / (2n)`` and its cost ``1 / (4n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    prof = Profile(tuple((2 * i - 1) / (2 * n) for i in range(1, n + 1)))
    return prof, c_free(prof)


def faultfree_reference(n: int) -> dict[str, float | None]:
    """Published fault-free PoA/PoS values, reported as metadata only.

    These use a different normalisation and are not recomputed here.
    """
    poa = 2.0 if n % 2 == 0 else (2.0 * n / (n + 1) if n > 3 else None)
    pos = float(n) if n == 2 else (1.0 / (n - 2) if n >= 4 else None)
    return {"poa_faultfree_reported": poa, "pos_faultfree_reported": pos}


@dataclass(frozen=True)
class EfficiencyReport:
    """Cost of the equilibrium relative to the social optimum.

    ``pos``/``poa`` divide by ``optimum_cost``; the ``*_alt`` fields divide
    by the alternative optimum ``1 / (2n)``.
    """

    n: int
    lam: float
    c_free: float
    optimum_cost: float
    pos: float
    poa: float
    alt_optimum_cost: float
    pos_alt: float
    poa_alt: float
    normalization: str
    notes: tuple[str, ...] = field(default_factory=tuple)


def pos_poa(
    config: GameConfig, normalization: Literal["computed", "half-n"] = "computed"
) -> EfficiencyReport:
    """Price of stability and anarchy of ``FPH(n, lam)``.

    The equilibrium is unique whenever it exists, so both prices coincide.
    ``normalization="half-n"`` swaps the primary and alternative
    denominators, for reproducing figures that use ``1 / (2n)``.
    """
    if not ne_exists(config):
        raise NoEquilibrium(f"FPH({config.n}, {config.lam}) has no equilibrium")
    eq = nash_equilibrium(config)
    if eq is None:
        raise NoEquilibrium(f"FPH({config.n}, {config.lam}) has no equilibrium")
    cost = c_free(eq)
    computed = 1.0 / (4 * config.n)
    half_n = 1.0 / (2 * config.n)
    primary, alt = (computed, half_n) if normalization == "computed" else (half_n, computed)
    notes = [
        f"optimum_cost={'1/(4n) by integration' if normalization == 'computed' else '1/(2n) as published'}",
        f"alt_optimum_cost={'1/(2n) as published' if normalization == 'computed' else '1/(4n) by integration'}",
        "unique equilibrium: pos == poa",
    ]
    return EfficiencyReport(
        n=config.n,
        lam=config.lam,
        c_free=cost,
        optimum_cost=primary,
        pos=cost / primary,
        poa=cost / primary,
        alt_optimum_cost=alt,
        pos_alt=cost / alt,
        poa_alt=cost / alt,
        normalization=normalization,
        notes=tuple(notes),
    )


def _pieces(faults: FaultSet) -> list[tuple[float, float]]:
    cuts = [0.0, *faults.points, 1.0]
    return list(zip(cuts, cuts[1:]))


def disconnected_fraction(profile: Profile | Sequence[float], faults: FaultSet) -> float:
    """Total length of fault-delimited pieces that contain no server."""
    u = np.asarray(_unique_sorted(profile))
    total = 0.0
    for a, b in _pieces(faults):
        if not np.any((u >= a) & (u <= b)):
            total += b - a
    return total


def disconnected_fraction_batch(profile: Profile | Sequence[float], faults: np.ndarray) -> np.ndarray:
    """Vectorised :func:`disconnected_fraction` over a padded fault batch."""
    u = np.asarray(_unique_sorted(profile))
    faults = np.asarray(faults, dtype=float)
    s = faults.shape[0]
    cuts = np.hstack([np.zeros((s, 1)), np.minimum(faults, 1.0), np.ones((s, 1))])
    lengths = np.diff(cuts, axis=1)
    lo, hi = cuts[:, :-1], cuts[:, 1:]
    served = np.searchsorted(u, hi, side="right") > np.searchsorted(u, lo, side="left")
    return np.where(served, 0.0, lengths).sum(axis=1)


@dataclass(frozen=True)
class AccessCostConfig:
    """Cost ``psi`` charged per unit length of disconnected clients."""

    psi: float = 100.0

    def __post_init__(self) -> None:
        if not self.psi >= 1.0:
            raise ValueError(f"psi must be >= 1, got {self.psi}")


@dataclass(frozen=True)
class AccessCost:
    total: float
    transport: float
    disconnect: float


def access_cost(
    profile: Profile | Sequence[float], faults: FaultSet, cfg: AccessCostConfig = AccessCostConfig()
) -> AccessCost:
    """Transport cost of connected clients plus ``psi`` times the disconnected length."""
    u = _unique_sorted(profile)
    transport = 0.0
    dark = 0.0
    for a, b in _pieces(faults):
        inside = [x for x in u if a <= x <= b]
        if not inside:
            dark += b - a
            continue
        transport += 0.5 * (inside[0] - a) ** 2 + 0.5 * (b - inside[-1]) ** 2
        transport += sum(0.25 * (q - p) ** 2 for p, q in zip(inside, inside[1:]))
    return AccessCost(total=transport + cfg.psi * dark, transport=transport, disconnect=cfg.psi * dark)


# --- expected disconnected fraction ---------------------------------------


def _hinterland_dark(lam: float, h: float) -> float:
    """Expected disconnected length of a hinterland of length ``h``."""
    if lam == 0.0 or h == 0.0:
        return 0.0
    x = lam * h
    if x < 1e-2:
        # h - (1 - e^{-x})/lam = h (x/2 - x^2/6 + x^3/24 - ...)
        return h * sum((-1) ** (m + 1) * x**m / math.factorial(m + 1) for m in range(1, 10))
    return h + math.expm1(-x) / lam


def _gap_dark(lam: float, g: float) -> float:
    """Expected disconnected length of a gap of length ``g`` between two servers."""
    if lam == 0.0 or g == 0.0:
        return 0.0
    x = lam * g
    if x < 1e-1:
        # coefficient of x^m is (-1)^m (m - 1) / (m + 1)!
        return g * sum((-1) ** m * (m - 1) * x**m / math.factorial(m + 1) for m in range(2, 16))
    return g * (1.0 + math.exp(-x) + 2.0 * math.expm1(-x) / x)


def _dark_closed(lam: float, u: Sequence[float]) -> float:
    total = _hinterland_dark(lam, u[0]) + _hinterland_dark(lam, 1.0 - u[-1])
    for a, b in zip(u, u[1:]):
        total += _gap_dark(lam, b - a)
    return total


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float | None = None
    samples: int | None = None


def expected_disconnected_fraction(
    config: GameConfig,
    profile: Profile | Sequence[float],
    mode: Literal["closed-form", "monte-carlo"] = "closed-form",
    samples: int = 100_000,
    seed: int = 42,
) -> Estimate:
    """Expected disconnected fraction under rate ``config.lam``.

    ``closed-form`` integrates the disconnection probability exactly;
    ``monte-carlo`` averages :func:`disconnected_fraction_batch` over
    sampled fault sets and reports the standard error.
    """
    u = _unique_sorted(profile)
    if mode == "closed-form":
        return Estimate(_dark_closed(config.lam, u))
    if mode != "monte-carlo":
        raise ValueError(f"unknown mode {mode!r}")
    total = 0.0
    total_sq = 0.0
    for batch in fault_batches(config.lam, samples, seed):
        d = disconnected_fraction_batch(u, batch)
        total += d.sum()
        total_sq += (d * d).sum()
    mean = float(total / samples)
    if samples < 2:
        return Estimate(mean, None, samples)
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return Estimate(mean, math.sqrt(var / samples), samples)


def _mirror(half: Sequence[float], n: int) -> list[float]:
    mid = [0.5] if n % 2 else []
    return [*half, *mid, *(1.0 - q for q in reversed(half))]


def optimal_dc_profile(
    config: GameConfig, starts: int = 16, tol: float = 1e-8, seed: int = 0, max_sweeps: int = 10_000
) -> Profile:
    """Profile minimising the expected disconnected fraction.

    Multi-start coordinate descent over the left half of a mirror-symmetric
    profile, one golden-section line search per coordinate.
    """
    n, lam = config.n, config.lam
    m = n // 2
    if m == 0:
        return Profile((0.5,))

    def objective(half: Sequence[float]) -> float:
        return _dark_closed(lam, _mirror(half, n))

    rng = np.random.default_rng(seed)
    best_half, best_val = None, math.inf
    for k in range(starts):
        if k == 0:
            half = [(2 * j + 1) / (2 * n) for j in range(m)]
        else:
            half = sorted(rng.uniform(0.0, 0.5, size=m).tolist())
        for _ in range(max_sweeps):
            moved = 0.0
            for j in range(m):
                lo = half[j - 1] if j > 0 else 0.0
                hi = half[j + 1] if j + 1 < m else 0.5

                def f(t: float, j=j) -> float:
                    trial = half.copy()
                    trial[j] = t
                    return -objective(trial)

                t = golden_section_max(f, lo, hi, tol=0.1 * tol)
                if f(t) < f(half[j]):
                    t = half[j]
                moved = max(moved, abs(t - half[j]))
                half[j] = t
            if moved < tol:
                break
        val = objective(half)
        if val < best_val:
            best_half, best_val = half, val
    return Profile(tuple(_mirror(best_half, n)))


# --- fault-free equilibria --------------------------------------------------


def faultfree_family_ok(h: float, gaps: Sequence[float], tol: float = 1e-12) -> bool:
    """Membership test for the implemented fault-free equilibrium family.

    Layout: a pair at ``h``, a pair at ``1 - h``, single servers in between,
    and gaps ``gaps`` between consecutive locations.  Conditions:

    * first and last gap equal ``2 h`` (each end pair is locally stable);
    * every gap is at most ``2 h`` (no one gains by entering a gap);
    * consecutive gaps around a single server sum to at least ``2 h``
      (the single earns at least a hinterland's worth);
    * lengths add up to 1.
    """
    g = list(gaps)
    if h <= 0.0 or not g or any(x < -tol for x in g):
        return False
    if abs(g[0] - 2 * h) > tol or abs(g[-1] - 2 * h) > tol:
        return False
    if any(x > 2 * h + tol for x in g):
        return False
    if any(a + b < 2 * h - tol for a, b in zip(g, g[1:])):
        return False
    return abs(2 * h + sum(g) - 1.0) <= 1e-9


def _family_profile(h: float, gaps: Sequence[float]) -> Profile:
    locs = [h]
    for g in gaps:
        locs.append(locs[-1] + g)
    pos = [locs[0], locs[0], *locs[1:-1], locs[-1], locs[-1]]
    return Profile(tuple(pos))


def faultfree_ne_profile(n: int, lam: float | None = None) -> Profile:
    """Fault-free equilibrium with the smallest expected disconnected fraction.

    ``n = 4`` and ``n = 5`` have a single member; for ``n >= 6`` the
    family has free parameters and ``lam`` is required to rank members.
    Every returned profile is re-verified as a fault-free equilibrium by
    grid scan.
    """
    from .deviate import verify_equilibrium

    if n == 1:
        return Profile((0.5,))
    if n == 2:
        return Profile((0.5, 0.5))
    if n == 3:
        raise UnsupportedN("the fault-free game has no equilibrium for n = 3")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 4:
        prof = Profile((0.25, 0.25, 0.75, 0.75))
    elif n == 5:
        prof = Profile((1 / 6, 1 / 6, 0.5, 5 / 6, 5 / 6))
    else:
        if lam is None:
            raise ValueError("lam is required to rank fault-free equilibria for n >= 6")
        prof = _best_family_member(n, lam)
    check = verify_equilibrium(GameConfig(n, 0.0), prof, tol=1e-9, grid_oracle=True)
    if not (check.is_equilibrium and check.grid_is_equilibrium):
        raise RuntimeError(f"candidate {prof} failed fault-free equilibrium verification")
    return prof


def _best_family_member(n: int, lam: float) -> Profile:
    k = n - 5  # free middle gaps

    def unpack(z: np.ndarray) -> tuple[float, list[float]]:
        h = float(z[0])
        return h, [2 * h, *map(float, z[1:]), 2 * h]

    def objective(z: np.ndarray) -> float:
        h, gaps = unpack(z)
        locs = np.cumsum([h, *gaps])
        return _dark_closed(lam, locs.tolist())

    cons = [{"type": "eq", "fun": lambda z: 6 * z[0] + z[1:].sum() - 1.0}]
    for j in range(k):
        cons.append({"type": "ineq", "fun": lambda z, j=j: 2 * z[0] - z[1 + j]})
    seq = lambda z: np.concatenate([[2 * z[0]], z[1:], [2 * z[0]]])
    cons.append({"type": "ineq", "fun": lambda z: seq(z)[:-1] + seq(z)[1:] - 2 * z[0]})
    bounds = [(1e-6, 1.0 / 6.0)] + [(0.0, 1.0)] * k

    best = None
    lo_h, hi_h = 1.0 / (2 * n - 4), (1.0 / (n + 1) if k >= 2 else 1.0 / 6.0)
    for h0 in np.linspace(lo_h, hi_h, 5):
        z0 = np.array([h0] + [(1 - 6 * h0) / k] * k)
        res = minimize(objective, z0, method="SLSQP", bounds=bounds, constraints=cons,
                       options={"ftol": 1e-14, "maxiter": 500})
        h, gaps = unpack(res.x)
        if not faultfree_family_ok(h, gaps, tol=1e-7):
            continue
        if best is None or res.fun < best[0]:
            best = (res.fun, h, gaps)
    if best is None:
        raise RuntimeError(f"no feasible fault-free family member found for n={n}")
    _, h, gaps = best
    # renormalise roundoff so locations close exactly at 1 - h
    scale = (1.0 - 2 * h) / sum(gaps)
    gaps = [g * scale for g in gaps]
    return _family_profile(h, gaps)
