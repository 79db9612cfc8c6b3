import math

import numpy as np
import pytest

from fphotelling.canonical import (
    CanonicalPair,
    canonical_pair,
    canonical_profile,
    lambda_min,
    reparam_forward,
    threshold,
)
from fphotelling.deviate import (
    best_response,
    grid_best_response,
    hinterland_optimum,
    internal_hinterland_margin,
    internal_hinterland_test,
    internal_optimum,
    verify_equilibrium,
)
from fphotelling.faultline import GameConfig, Profile
from fphotelling.payoff import em, expected_payoff

import oracles

# frozen from bounded scalar optimisation of quadrature payoffs
T_STAR_4_025 = 0.18129133680775256
THETA_4_025 = 0.1629155372308581
U_INTERNAL_3_4 = 0.22409041912141828


def _pair_from_alpha(alpha: float, n: int) -> CanonicalPair:
    r = reparam_forward(alpha, n)
    return CanonicalPair(H=r.H, M=r.M, n=n, lam=r.lam, alpha=alpha)


def test_hinterland_optimum_examples():
    assert hinterland_optimum(1.0, 0.5)[0] == 0.5
    t, _ = hinterland_optimum(4.0, 0.5)
    assert t == pytest.approx(0.25, abs=1e-12)
    # the quoted approximation t* ~ 0.1803 is off in the third digit
    t, p = hinterland_optimum(4.0, 0.25)
    assert t == pytest.approx(T_STAR_4_025, abs=1e-11)
    assert p == pytest.approx(THETA_4_025, abs=1e-13)
    assert 4.0 * t > math.log(2)
    resid = math.exp(-4 * t) - 0.5 * math.exp(-4 * (0.25 - t)) * (1 + 4 * (0.25 - t))
    assert abs(resid) < 1e-10


@pytest.mark.parametrize("lam", [0.5, 2.0, 4.0, 9.0, 30.0])
@pytest.mark.parametrize("s", [0.05, 0.2, 0.5, 0.9])
def test_hinterland_optimum_against_optimiser(lam, s):
    t, p = hinterland_optimum(lam, s)
    t_ref, p_ref = oracles.hinterland_ref(lam, s)
    assert p == pytest.approx(p_ref, abs=1e-12)
    assert t == pytest.approx(t_ref, abs=1e-6)
    if lam * s > math.log(2):
        assert lam * t > math.log(2)


def test_internal_optimum_examples():
    t, p = internal_optimum(4.0, 0.5)
    assert t == 0.25 and p == pytest.approx(U_INTERNAL_3_4, rel=1e-13)
    assert internal_optimum(1.0, 0.0)[1] == 0.0


def test_internal_optimum_is_midpoint():
    lam, s = 5.0, 0.4
    grid = np.linspace(0, s, 4001)
    vals = em(lam, grid) + em(lam, s - grid)
    assert grid[np.argmax(vals)] == pytest.approx(0.2, abs=1e-3)


def test_best_response_examples():
    cfg = GameConfig(3, 4.0)
    r = best_response(cfg, (0.25, 0.5, 0.75), 1)
    assert r.gain <= 1e-9
    cfg2 = GameConfig(3, 2.0)
    prof = _pair_from_alpha(canonical_pair(cfg2).alpha, 3).profile()
    assert best_response(cfg2, prof, 1).gain > 0
    assert best_response(GameConfig(2, 1.0), (0.5, 0.5), 0).gain <= 1e-9


def test_verify_examples():
    assert verify_equilibrium(GameConfig(3, 4.0), (0.25, 0.5, 0.75), tol=1e-9, grid_oracle=True)
    bad = verify_equilibrium(GameConfig(3, 4.0), (0.2, 0.5, 0.8), tol=1e-9, grid_oracle=True)
    assert not bad.is_equilibrium and bad.grid_is_equilibrium is False
    assert bad.reports[0].gain > 0
    cfg = GameConfig(4, 3.0)
    assert not verify_equilibrium(cfg, canonical_profile(cfg), grid_oracle=True).is_equilibrium


def test_verify_rejects_bad_input():
    with pytest.raises(ValueError):
        verify_equilibrium(GameConfig(3, 4.0), (0.25, 0.75))
    with pytest.raises(ValueError):
        verify_equilibrium(GameConfig(2, 4.0), (0.25, 0.75), tol=0.0)


def test_below_threshold_internal_player_moves_to_hinterland():
    lam = lambda_min(3) - 0.05
    cfg = GameConfig(3, lam)
    prof = canonical_profile(cfg)
    r = best_response(cfg, prof, 1)
    assert r.gain > 0
    assert r.best_point < prof[0] or r.best_point > prof[2]


def test_internal_hinterland_test_examples():
    pair = canonical_pair(GameConfig(3, 4.0))
    assert internal_hinterland_test(pair)
    assert internal_hinterland_margin(pair) == pytest.approx(U_INTERNAL_3_4 - THETA_4_025, abs=1e-12)
    for n in (3, 5, 12):
        at = _pair_from_alpha(threshold().alpha0, n)
        assert abs(internal_hinterland_margin(at)) < 1e-8
        assert not internal_hinterland_test(_pair_from_alpha(0.5, n))


@pytest.mark.parametrize("n", [3, 4, 6, 10])
def test_canonical_is_equilibrium_iff_above_threshold(n):
    lmin = lambda_min(n)
    for lam in (lmin + 0.02, lmin + 1.0, 2 * lmin, 40.0):
        cfg = GameConfig(n, lam)
        assert verify_equilibrium(cfg, canonical_profile(cfg)).is_equilibrium
    for lam in (lmin - 0.02, lmin - 0.5):
        cfg = GameConfig(n, lam)
        assert not verify_equilibrium(cfg, canonical_profile(cfg)).is_equilibrium


def test_two_players():
    for lam in (0.3, 1.0, 2 * math.log(2)):
        assert verify_equilibrium(GameConfig(2, lam), (0.5, 0.5), grid_oracle=True).is_equilibrium
    for lam in (1.5, 4.0, 25.0):
        cfg = GameConfig(2, lam)
        assert verify_equilibrium(cfg, canonical_profile(cfg), grid_oracle=True).is_equilibrium
    # above 2 ln 2 the centre pair is no longer stable
    assert not verify_equilibrium(GameConfig(2, 4.0), (0.5, 0.5)).is_equilibrium


def test_random_profiles_analytic_matches_grid():
    rng = np.random.default_rng(20240611)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        lam = float(rng.choice([0.0, rng.uniform(0.1, 25.0)]))
        pos = rng.uniform(0, 1, size=n)
        if n >= 3 and rng.random() < 0.3:
            pos[1] = pos[0]  # exercise colocation
        cfg = GameConfig(n, lam)
        prof = Profile(tuple(pos))
        i = int(rng.integers(0, n))
        a = best_response(cfg, prof, i)
        g = grid_best_response(cfg, prof, i)
        # analytic never worse than the grid, and the grid gets within the refinement error
        assert a.best_payoff >= g.best_payoff - 1e-12
        assert a.best_payoff - g.best_payoff < 1e-7
        assert a.gain >= 0


def test_best_response_is_attained_payoff():
    cfg = GameConfig(4, 6.0)
    prof = Profile((0.1, 0.3, 0.55, 0.9))
    for i in range(4):
        r = best_response(cfg, prof, i)
        if r.attained:
            moved = prof.replace(i, r.best_point)
            j = [k for k, v in enumerate(moved) if v == r.best_point][0]
            assert expected_payoff(cfg, moved, j).total == pytest.approx(r.best_payoff, abs=1e-13)
