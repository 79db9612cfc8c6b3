"""Scalar root finding and line search used across the package.

Every implicit equation in the game is monotone on a known bracket, so a
bisection-safeguarded Newton iteration is enough and never needs a good
starting guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

__all__ = [
    "SolverTolerances",
    "DEFAULT_TOLERANCES",
    "RootNotBracketed",
    "safe_newton",
    "golden_section_max",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class SolverTolerances:
    """Absolute tolerances for the implicit-equation solvers."""

    residual: float = 1e-12
    root: float = 1e-10
    max_iter: int = 200


DEFAULT_TOLERANCES = SolverTolerances()


class RootNotBracketed(ValueError):
    """Raised when f(lo) and f(hi) share a sign."""


def safe_newton(
    f: Callable[[float], float],
    df: Callable[[float], float],
    lo: float,
    hi: float,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> float:
    """Find a root of ``f`` in ``[lo, hi]``.

    Newton steps are taken when they stay inside the current bracket and
    shrink the residual fast enough; otherwise the bracket is bisected.
    The bracket is always maintained, so convergence is guaranteed for any
    continuous ``f`` with a sign change.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise RootNotBracketed(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    # orient so that f(a) < 0 < f(b)
    a, b = (lo, hi) if flo < 0.0 else (hi, lo)

    x = 0.5 * (lo + hi)
    dx_old = abs(hi - lo)
    dx = dx_old
    fx, dfx = f(x), df(x)
    for _ in range(tol.max_iter):
        newton_ok = dfx != 0.0
        if newton_ok:
            x_new = x - fx / dfx
            newton_ok = min(a, b) < x_new < max(a, b) and abs(2.0 * fx) <= abs(dx_old * dfx)
        dx_old = dx
        if newton_ok:
            dx = fx / dfx
            x = x - dx
        else:
            dx = 0.5 * (b - a)
            x = a + dx
        fx = f(x)
        if fx == 0.0:
            return x
        if fx < 0.0:
            a = x
        else:
            b = x
        if abs(b - a) < tol.root and abs(fx) < tol.residual:
            return x
        if abs(dx) < 0.25 * tol.root and abs(fx) < tol.residual:
            return x
        # bracket collapsed to roundoff; residual cannot improve further
        if abs(b - a) <= 4.0 * EPS * max(1.0, abs(x)):
            return x
        dfx = df(x)
    return x


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_iter: int = 500
) -> float:
    """Maximise a unimodal ``f`` on ``[a, b]``; returns the argmax."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
