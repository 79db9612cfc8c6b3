import itertools
import math

import numpy as np
import pytest
from scipy import optimize

from fphotelling.canonical import canonical_pair, canonical_profile, lambda_max, lambda_min
from fphotelling.deviate import verify_equilibrium
from fphotelling.efficiency import (
    AccessCostConfig,
    NoEquilibrium,
    UnsupportedN,
    access_cost,
    c_free,
    canonical_c_free,
    disconnected_fraction,
    disconnected_fraction_batch,
    expected_disconnected_fraction,
    faultfree_family_ok,
    faultfree_ne_profile,
    optimal_dc_profile,
    pos_poa,
    social_optimum,
)
from fphotelling.faultline import FaultSet, GameConfig, Profile, sample_fault_batch

import oracles

# frozen oracle values (quadrature of distance to nearest server)
POS_5_LMAX = 1.0375069455
POS_5_LMIN = 1.27665025413


# --- transportation cost -------------------------------------------------------


def test_c_free_examples():
    assert c_free((0.5,)) == 0.25
    assert c_free((0.25, 0.5, 0.75)) == pytest.approx(0.09375, abs=1e-15)
    assert c_free((1 / 6, 0.5, 5 / 6)) == pytest.approx(1 / 12, abs=1e-15)


@pytest.mark.parametrize("positions", [(0.1, 0.2, 0.9), (0.3, 0.3), (0.0, 1.0), (0.05, 0.4, 0.41, 0.77)])
def test_c_free_against_quadrature(positions):
    assert c_free(positions) == pytest.approx(oracles.c_free_quad(positions), abs=1e-12)


@pytest.mark.parametrize("n,lam", [(3, 4.0), (5, 7.0), (9, 20.0)])
def test_canonical_c_free_formula(n, lam):
    pair = canonical_pair(GameConfig(n, lam))
    assert canonical_c_free(pair.H, pair.M, n) == pytest.approx(c_free(pair.profile()), abs=1e-14)


def test_social_optimum_examples():
    p, c = social_optimum(1)
    assert p.positions == (0.5,) and c == 0.25
    p, c = social_optimum(2)
    assert p.positions == (0.25, 0.75) and c == 0.125
    p, c = social_optimum(4)
    assert p.positions == (0.125, 0.375, 0.625, 0.875) and c == pytest.approx(1 / 16, abs=1e-15)


@pytest.mark.parametrize("n", [2, 3])
def test_social_optimum_brute_force(n):
    grid = np.linspace(0, 1, 61)
    best = min(c_free(p) for p in itertools.combinations(grid, n))
    assert social_optimum(n)[1] == pytest.approx(best, abs=1e-12)
    res = optimize.minimize(lambda z: c_free(np.clip(z, 0, 1)), x0=np.linspace(0.2, 0.8, n), method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14})
    assert res.fun == pytest.approx(1 / (4 * n), abs=1e-9)


def test_pos_poa_examples():
    rep = pos_poa(GameConfig(3, 4.0))
    assert rep.c_free == pytest.approx(0.09375, abs=1e-15)
    assert rep.pos == rep.poa == pytest.approx(1.125, abs=1e-13)
    assert rep.pos_alt == pytest.approx(0.5625, abs=1e-13)
    assert pos_poa(GameConfig(3, 4.0), "half-n").pos == pytest.approx(0.5625, abs=1e-13)
    with pytest.raises(NoEquilibrium):
        pos_poa(GameConfig(4, 3.0))


def test_pos_ordering_n5():
    hi = pos_poa(GameConfig(5, lambda_max(5))).pos
    lo = pos_poa(GameConfig(5, lambda_min(5))).pos
    assert hi == pytest.approx(POS_5_LMAX, abs=1e-9)
    assert lo == pytest.approx(POS_5_LMIN, abs=1e-9)
    for lam in np.linspace(lambda_min(5), 40, 60):
        p = pos_poa(GameConfig(5, lam)).pos
        assert hi - 1e-12 <= p <= lo + 1e-12
    # independent check by quadrature of the canonical profile
    prof = canonical_profile(GameConfig(5, lambda_max(5)))
    assert oracles.c_free_quad(prof.positions) * 20 == pytest.approx(POS_5_LMAX, abs=1e-9)


# --- disconnection and access cost -------------------------------------------------


def test_disconnected_fraction_examples():
    assert disconnected_fraction((0.3, 0.7), FaultSet()) == 0.0
    assert disconnected_fraction((0.25, 0.75), FaultSet((0.4, 0.6))) == pytest.approx(0.2, abs=1e-15)
    assert disconnected_fraction((0.5,), FaultSet((0.2,))) == pytest.approx(0.2, abs=1e-15)


def test_disconnected_batch_matches_scalar():
    prof = Profile((0.1, 0.5, 0.5, 0.8))
    batch = sample_fault_batch(9.0, 400, np.random.default_rng(8))
    got = disconnected_fraction_batch(prof, batch)
    for r, row in enumerate(batch):
        fs = FaultSet(tuple(row[np.isfinite(row)]))
        assert got[r] == pytest.approx(disconnected_fraction(prof, fs), abs=1e-15)


def test_access_cost_examples():
    cfg = AccessCostConfig(psi=100.0)
    c = access_cost((0.5,), FaultSet(), cfg)
    assert (c.total, c.transport, c.disconnect) == (0.25, 0.25, 0.0)
    c = access_cost((0.25, 0.75), FaultSet((0.5,)), cfg)
    assert c.disconnect == 0.0 and c.transport == pytest.approx(0.125, abs=1e-15)
    c = access_cost((0.25, 0.75), FaultSet((0.4, 0.6)), cfg)
    assert c.disconnect == pytest.approx(20.0, abs=1e-12)
    assert c.total == pytest.approx(c.transport + 20.0, abs=1e-12)
    with pytest.raises(ValueError):
        AccessCostConfig(psi=0.5)


@pytest.mark.parametrize(
    "lam,positions",
    [(2.0, (0.5,)), (1e-3, (0.2, 0.7)), (8.0, (0.1, 0.4, 0.41, 0.9)), (50.0, (0.3, 0.6)), (0.05, (0.5, 0.5))],
)
def test_expected_dark_closed_form_vs_quadrature(lam, positions):
    cfg = GameConfig(len(positions), lam)
    got = expected_disconnected_fraction(cfg, positions).value
    assert got == pytest.approx(oracles.dark_quad(lam, positions), abs=1e-12)


def test_expected_dark_small_rate_limit():
    cfg = GameConfig(2, 1e-12)
    assert expected_disconnected_fraction(cfg, (0.3, 0.8)).value < 1e-11


def test_expected_dark_monte_carlo_agreement():
    cfg = GameConfig(1, 2.0)
    closed = expected_disconnected_fraction(cfg, (0.5,)).value
    mc = expected_disconnected_fraction(cfg, (0.5,), mode="monte-carlo", samples=1_000_000, seed=42)
    assert abs(mc.value - closed) < 3 * mc.stderr
    with pytest.raises(ValueError):
        expected_disconnected_fraction(cfg, (0.5,), mode="bogus")


# --- comparison profiles ----------------------------------------------------------


def test_optimal_dc_examples():
    assert optimal_dc_profile(GameConfig(1, 3.0)).positions == (0.5,)
    cfg = GameConfig(2, 4.0)
    prof = optimal_dc_profile(cfg)
    assert prof[0] == pytest.approx(1 - prof[1], abs=1e-12)
    res = optimize.minimize_scalar(lambda a: oracles.dark_quad(4.0, (a, 1 - a)), bounds=(0, 0.5),
                                   method="bounded", options={"xatol": 1e-10})
    assert prof[0] == pytest.approx(res.x, abs=1e-6)


@pytest.mark.parametrize("n,lam", [(3, 2.0), (4, 8.0), (6, 15.0)])
def test_optimal_dc_satisfies_stationarity(n, lam):
    # stationarity: interior gaps equal g, e^{-lam h} = e^{-lam g}(1 + lam g), 2h + (n-1)g = 1
    g_of = lambda h: (1 - 2 * h) / (n - 1)
    h = optimize.brentq(lambda h: math.exp(-lam * h) - math.exp(-lam * g_of(h)) * (1 + lam * g_of(h)),
                        1e-9, 0.5 - 1e-9, xtol=1e-15)
    want = [h + k * g_of(h) for k in range(n)]
    np.testing.assert_allclose(optimal_dc_profile(GameConfig(n, lam)).positions, want, atol=1e-7)


def test_optimal_dc_beats_equilibria_n4_lam8():
    cfg = GameConfig(4, 8.0)
    dark = lambda p: expected_disconnected_fraction(cfg, p).value
    o = dark(optimal_dc_profile(cfg))
    assert o < dark(canonical_profile(cfg))
    assert o < dark(faultfree_ne_profile(4))


def test_faultfree_examples():
    assert faultfree_ne_profile(4).positions == (0.25, 0.25, 0.75, 0.75)
    assert faultfree_ne_profile(5).positions == pytest.approx((1 / 6, 1 / 6, 0.5, 5 / 6, 5 / 6), abs=1e-15)
    with pytest.raises(UnsupportedN):
        faultfree_ne_profile(3)
    with pytest.raises(ValueError):
        faultfree_ne_profile(7)


def test_faultfree_family_membership():
    assert faultfree_family_ok(0.25, [0.5])
    assert faultfree_family_ok(1 / 8, [0.25, 0.25, 0.25])
    assert not faultfree_family_ok(0.2, [0.4, 0.2])  # wrong total
    assert not faultfree_family_ok(0.1, [0.2, 0.3, 0.2])  # middle gap too long


@pytest.mark.parametrize("lam", [2.0, 10.0])
def test_faultfree_n6_one_parameter_sweep(lam):
    # family for n = 6: gaps (2h, 1 - 6h, 2h) with 1/8 <= h <= 1/6
    best = None
    for h in np.linspace(1 / 8, 1 / 6, 401):
        locs = [h, 3 * h, 1 - 3 * h, 1 - h]
        prof = Profile((locs[0], locs[0], locs[1], locs[2], locs[3], locs[3]))
        v = oracles.dark_quad(lam, prof.positions)
        if best is None or v < best[0]:
            best = (v, prof)
    for prof in (best[1], Profile((1 / 6, 1 / 6, 0.5, 0.5, 5 / 6, 5 / 6))):
        assert verify_equilibrium(GameConfig(6, 0.0), prof, grid_oracle=True).grid_is_equilibrium
    got = faultfree_ne_profile(6, lam)
    assert verify_equilibrium(GameConfig(6, 0.0), got, grid_oracle=True).is_equilibrium
    val = expected_disconnected_fraction(GameConfig(6, lam), got).value
    assert val == pytest.approx(best[0], abs=1e-6)
    assert val <= best[0] + 1e-12


def test_figure4_ordering_n4():
    y = faultfree_ne_profile(4)
    crossed = False
    for lam in (1.4, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0):
        cfg = GameConfig(4, lam)
        dark = lambda p: expected_disconnected_fraction(cfg, p).value
        x = canonical_profile(cfg)
        assert dark(optimal_dc_profile(cfg)) <= dark(x) + 1e-12
        if dark(x) < dark(y):
            crossed = True
        elif crossed:
            pytest.fail("canonical profile fell back above the fault-free profile")
    assert crossed
