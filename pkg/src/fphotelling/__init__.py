"""Hotelling location game on a segment with Poisson line faults."""

__version__ = "0.1.0"

from .faultline import FaultSet, GameConfig, Market, Profile, monte_carlo_payoffs, sample_faults
from .payoff import eh, em, expected_payoff, expected_payoffs
from .canonical import (
    CanonicalPair,
    NoCanonicalPair,
    alpha_max,
    canonical_pair,
    canonical_profile,
    lambda_max,
    lambda_min,
    nash_equilibrium,
    threshold,
)
from .deviate import best_response, verify_equilibrium
from .efficiency import (
    access_cost,
    c_free,
    expected_disconnected_fraction,
    faultfree_ne_profile,
    optimal_dc_profile,
    pos_poa,
)

__all__ = [
    "__version__",
    "FaultSet",
    "GameConfig",
    "Market",
    "Profile",
    "monte_carlo_payoffs",
    "sample_faults",
    "eh",
    "em",
    "expected_payoff",
    "expected_payoffs",
    "CanonicalPair",
    "NoCanonicalPair",
    "alpha_max",
    "canonical_pair",
    "canonical_profile",
    "lambda_max",
    "lambda_min",
    "nash_equilibrium",
    "threshold",
    "best_response",
    "verify_equilibrium",
    "access_cost",
    "c_free",
    "expected_disconnected_fraction",
    "faultfree_ne_profile",
    "optimal_dc_profile",
    "pos_poa",
]
