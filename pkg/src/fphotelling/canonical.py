"""Canonical pairs, the alpha reparameterisation and the existence threshold.

For ``n >= 2`` and ``lam > 2 ln 2`` the candidate equilibrium places the
servers at ``H + k M`` (``k = 0..n-1``), where the pair ``(H, M)`` solves

    exp(lam (M - H)) = (1 + lam M) / 2,   2 H + (n - 1) M = 1,   lam H > ln 2.

Writing ``alpha = lam M`` and ``c = 1 - H / M`` turns this into explicit
functions of ``alpha``; only ``alpha(lam)`` needs a scalar root find.
Whether that profile is an equilibrium is decided by comparing two
auxiliary roots ``beta1(alpha)`` and ``beta2(alpha)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

from ._numerics import DEFAULT_TOLERANCES, SolverTolerances, golden_section_max, safe_newton
from .faultline import GameConfig, Profile

__all__ = [
    "NoCanonicalPair",
    "CanonicalPair",
    "ReparamPoint",
    "ThresholdResult",
    "LN2",
    "ALPHA_BRACKET",
    "BETA_BRACKET",
    "c_of_alpha",
    "reparam_forward",
    "lambda_of_alpha",
    "lambda_to_alpha",
    "canonical_pair",
    "canonical_profile",
    "beta1",
    "beta2",
    "beta_pair",
    "threshold",
    "lambda_min",
    "lambda_min_linear",
    "alpha_max",
    "lambda_max",
    "ne_exists",
    "nash_equilibrium",
]

LN2 = math.log(2.0)
ALPHA_BRACKET = (1e-9, 64.0)
BETA_BRACKET = (0.0, 32.0)
# linear fit reported alongside the exact threshold
LINEAR_SLOPE = 0.58813
LINEAR_INTERCEPT = 1.04931


class NoCanonicalPair(ValueError):
    """No canonical pair exists (``lam <= 2 ln 2`` or ``n < 2``)."""


def c_of_alpha(alpha: float) -> float:
    """``1 - H/M`` as a function of ``alpha = lam M``."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    # ln((1+a)/2) = log1p((a-1)/2), accurate around a = 1
    return math.log1p(0.5 * (alpha - 1.0)) / alpha


def _c_prime(alpha: float) -> float:
    return (alpha / (1.0 + alpha) - math.log1p(0.5 * (alpha - 1.0))) / alpha**2


def lambda_of_alpha(alpha: float, n: int) -> float:
    return alpha * (n + 1) - 2.0 * math.log1p(0.5 * (alpha - 1.0))


def _lambda_prime(alpha: float, n: int) -> float:
    return (n + 1) - 2.0 / (1.0 + alpha)


@dataclass(frozen=True)
class Reparam:
    c: float
    M: float
    H: float
    lam: float


def reparam_forward(alpha: float, n: int) -> Reparam:
    """Explicit ``(c, M, H, lam)`` for a given ``alpha`` and ``n``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    c = c_of_alpha(alpha)
    m = 1.0 / (n + 1 - 2.0 * c)
    return Reparam(c=c, M=m, H=(1.0 - c) * m, lam=lambda_of_alpha(alpha, n))


def lambda_to_alpha(lam: float, n: int, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Invert ``lam(alpha)``, which is strictly increasing on ``alpha > 0``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not lam > 2.0 * LN2:
        raise NoCanonicalPair(f"no canonical pair for lam={lam} <= 2 ln 2")
    lo, hi = ALPHA_BRACKET
    while lambda_of_alpha(lo, n) > lam:
        lo *= 1e-3
        if lo < 1e-300:
            raise NoCanonicalPair(f"lam={lam} indistinguishable from 2 ln 2")
    while lambda_of_alpha(hi, n) < lam:
        hi *= 2.0
    return safe_newton(
        lambda a: lambda_of_alpha(a, n) - lam,
        lambda a: _lambda_prime(a, n),
        lo,
        hi,
        tol,
    )


@dataclass(frozen=True)
class CanonicalPair:
    """Hinterland length ``H`` and gap ``M`` of the canonical profile."""

    H: float
    M: float
    n: int
    lam: float
    alpha: float

    @property
    def c(self) -> float:
        return 1.0 - self.H / self.M

    def residuals(self) -> tuple[float, float, float]:
        """Residuals of the three defining relations (the last is ``lam H - ln 2``, must be > 0)."""
        lam, h, m = self.lam, self.H, self.M
        r1 = math.exp(lam * (m - h)) - 0.5 * (1.0 + lam * m)
        r2 = 2.0 * h + (self.n - 1) * m - 1.0
        return r1, r2, lam * h - LN2

    def profile(self) -> Profile:
        return Profile(tuple(self.H + k * self.M for k in range(self.n)))


def canonical_pair(config: GameConfig) -> CanonicalPair:
    if config.n < 2:
        raise NoCanonicalPair("canonical pairs are defined for n >= 2")
    alpha = lambda_to_alpha(config.lam, config.n)
    r = reparam_forward(alpha, config.n)
    return CanonicalPair(H=r.H, M=r.M, n=config.n, lam=config.lam, alpha=alpha)


def canonical_profile(config: GameConfig) -> Profile:
    """Positions ``H + k M``; raises :class:`NoCanonicalPair` below ``2 ln 2``."""
    return canonical_pair(config).profile()


def _g1(beta: float) -> float:
    return math.exp(-2.0 * beta) * (1.0 + beta)


def _g2(beta: float) -> float:
    return math.exp(-beta) * (0.75 + 0.5 * beta)


def beta1(alpha: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Root ``b >= 0`` of ``exp(-a)(1+a) = exp(-2b)(1+b)``."""
    target = math.exp(-alpha) * (1.0 + alpha)
    if target >= 1.0:
        return 0.0
    lo, hi = BETA_BRACKET
    return safe_newton(
        lambda b: _g1(b) - target,
        lambda b: -math.exp(-2.0 * b) * (1.0 + 2.0 * b),
        lo,
        hi,
        tol,
    )


def beta2(alpha: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float | None:
    """Root ``b >= 0`` of ``exp(-a)(1+a/2) = exp(-b)(3/4 + b/2)``, or None if there is none."""
    target = math.exp(-alpha) * (1.0 + 0.5 * alpha)
    if target > 0.75:
        return None
    if target == 0.75:
        return 0.0
    lo, hi = BETA_BRACKET
    return safe_newton(
        lambda b: _g2(b) - target,
        lambda b: -0.25 * math.exp(-b) * (1.0 + 2.0 * b),
        lo,
        hi,
        tol,
    )


def dbeta1_dalpha(alpha: float, b1: float) -> float:
    return math.exp(2.0 * b1 - alpha) * alpha / (1.0 + 2.0 * b1)


def dbeta2_dalpha(alpha: float, b2: float) -> float:
    return math.exp(b2 - alpha) * (2.0 + 2.0 * alpha) / (1.0 + 2.0 * b2)


@dataclass(frozen=True)
class ReparamPoint:
    """Diagnostic state ``(alpha, c, beta1, beta2)``; ``beta2`` may be absent."""

    alpha: float
    c: float | None
    beta1: float
    beta2: float | None

    @property
    def ne_condition(self) -> bool:
        """``beta1 <= beta2``; an absent ``beta2`` fails the condition."""
        return self.beta2 is not None and self.beta1 <= self.beta2


def beta_pair(alpha: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> ReparamPoint:
    if alpha < 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    c = c_of_alpha(alpha) if alpha > 0.0 else None
    return ReparamPoint(alpha=alpha, c=c, beta1=beta1(alpha, tol), beta2=beta2(alpha, tol))


def _beta2_floor() -> float:
    """Smallest alpha at which beta2 exists (beta2 = 0 there)."""
    return safe_newton(
        lambda a: math.exp(-a) * (1.0 + 0.5 * a) - 0.75,
        lambda a: -0.5 * math.exp(-a) * (1.0 + a),
        0.0,
        1.0,
    )


@dataclass(frozen=True)
class ThresholdResult:
    """Crossing point ``(alpha0, beta0)`` of the two beta curves."""

    alpha0: float
    beta0: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def c0(self) -> float:
        return c_of_alpha(self.alpha0)

    def lambda_min(self, n: int) -> float:
        """Exact threshold ``(n+1) alpha0 - 2 ln((1 + alpha0) / 2)``."""
        if n in self._cache:
            return self._cache[n]
        value = lambda_of_alpha(self.alpha0, n)
        with self._lock:
            self._cache[n] = value
        return value


@lru_cache(maxsize=None)
def threshold(tol: SolverTolerances = DEFAULT_TOLERANCES) -> ThresholdResult:
    """Solve ``beta2(alpha) = beta1(alpha)`` for the threshold constant ``alpha0``.

    Below ``alpha0`` the internal-to-hinterland move is profitable, above it
    is not.  The search starts where ``beta2`` first exists, where
    ``beta2 - beta1 < 0``, and ends at ``alpha = 1``, where it is positive.
    """

    def gap(a: float) -> float:
        return beta2(a, tol) - beta1(a, tol)

    def dgap(a: float) -> float:
        return dbeta2_dalpha(a, beta2(a, tol)) - dbeta1_dalpha(a, beta1(a, tol))

    lo = _beta2_floor()
    # nudge off the point where beta2 is exactly zero
    lo = lo + 1e-12
    alpha0 = safe_newton(gap, dgap, lo, 1.0, tol)
    b1 = beta1(alpha0, tol)
    b2 = beta2(alpha0, tol)
    return ThresholdResult(alpha0=alpha0, beta0=0.5 * (b1 + b2))


def lambda_min(n: int) -> float:
    """Smallest fault rate with an equilibrium for ``n >= 3`` players."""
    if n < 3:
        raise ValueError("the threshold applies to n >= 3")
    return threshold().lambda_min(n)


def lambda_min_linear(n: int) -> float:
    """Linear approximation ``0.58813 n + 1.04931`` of :func:`lambda_min`."""
    return LINEAR_SLOPE * n + LINEAR_INTERCEPT


@lru_cache(maxsize=None)
def alpha_max() -> tuple[float, float]:
    """Argmax and max of ``c(alpha)``, by golden section on [1, 10]."""
    a = golden_section_max(c_of_alpha, 1.0, 10.0, tol=1e-10)
    return a, c_of_alpha(a)


def lambda_max(n: int) -> float:
    """Fault rate maximising the canonical gap ``M`` for ``n`` players."""
    return lambda_of_alpha(alpha_max()[0], n)


def ne_exists(config: GameConfig) -> bool:
    if config.n <= 2:
        return True
    return config.lam >= lambda_min(config.n)


def nash_equilibrium(config: GameConfig) -> Profile | None:
    """The unique equilibrium profile, or None when the game has none."""
    if config.n == 1:
        return Profile((0.5,))
    if config.n == 2:
        if config.lam > 2.0 * LN2:
            return canonical_profile(config)
        return Profile((0.5, 0.5))
    if not ne_exists(config):
        return None
    return canonical_profile(config)
