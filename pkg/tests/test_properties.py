import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from fphotelling.canonical import canonical_pair, lambda_of_alpha, lambda_to_alpha, lambda_min
from fphotelling.deviate import best_response, grid_best_response, hinterland_optimum
from fphotelling.efficiency import c_free, disconnected_fraction, expected_disconnected_fraction
from fphotelling.faultline import FaultSet, GameConfig, Profile, realized_market, realized_payoff
from fphotelling.payoff import eh, em, expected_payoffs

unit = st.floats(0.0, 1.0, allow_nan=False)
rate = st.floats(0.0, 50.0, allow_nan=False)
positions = st.lists(unit, min_size=1, max_size=7)
faults = st.lists(st.floats(1e-9, 1 - 1e-9), max_size=12, unique=True).map(lambda v: FaultSet(tuple(sorted(v))))


@given(rate, unit)
def test_region_profits_bounded(lam, d):
    assert 0.0 <= em(lam, d) <= 0.5 * d + 1e-15
    assert em(lam, d) <= eh(lam, d) + 1e-15 <= d + 2e-15


@given(st.floats(0.01, 50.0), unit, unit)
def test_region_profits_monotone(lam, a, b):
    lo, hi = sorted((a, b))
    assert eh(lam, lo) <= eh(lam, hi) + 1e-15
    assert em(lam, lo) <= em(lam, hi) + 1e-15


@given(positions, faults)
def test_realized_payoffs_cover_connected_clients(pos, fs):
    p = Profile(tuple(pos))
    served = sum(realized_payoff(p, i, fs) for i in range(len(p)))
    assert served == pytest.approx(1.0 - disconnected_fraction(p, fs), abs=1e-12)


@given(positions, faults)
def test_market_contains_server(pos, fs):
    p = Profile(tuple(pos))
    for i in range(len(p)):
        m = realized_market(p, i, fs)
        assert 0.0 <= m.left <= p[i] <= m.right <= 1.0


@given(positions, st.floats(0.0, 30.0))
def test_expected_payoffs_plus_dark_sum_to_one(pos, lam):
    p = Profile(tuple(pos))
    cfg = GameConfig(len(p), lam)
    total = expected_payoffs(cfg, p).sum() + expected_disconnected_fraction(cfg, p).value
    assert total == pytest.approx(1.0, abs=1e-12)


@given(positions)
def test_c_free_at_least_social_optimum(pos):
    n = len(set(pos))
    assert c_free(pos) >= 1 / (4 * n) - 1e-15


@given(st.integers(2, 30), st.floats(1.4, 200.0))
def test_canonical_invariants(n, lam):
    pair = canonical_pair(GameConfig(n, lam))
    r1, r2, r3 = pair.residuals()
    assert abs(r1) < 1e-9 and abs(r2) < 1e-13 and r3 > 0
    assert lambda_of_alpha(lambda_to_alpha(lam, n), n) == pytest.approx(lam, rel=1e-12)


@given(st.integers(2, 12), st.floats(1.4, 60.0))
def test_region_difference(n, lam):
    pair = canonical_pair(GameConfig(n, lam))
    pay = expected_payoffs(GameConfig(n, lam), pair.profile())
    assert pay[0] - 2 * em(lam, pair.M) == pytest.approx(math.exp(-lam * pair.M) / (2 * lam), abs=1e-12)
    assert pay[0] == pytest.approx(pay[-1], abs=1e-14)


@given(st.floats(0.0, 40.0), st.floats(1e-3, 1.0))
def test_hinterland_optimum_beats_endpoints(lam, s):
    t, p = hinterland_optimum(lam, s)
    assert 0.0 < t <= s
    assert p >= eh(lam, s) - 1e-14
    assert p >= em(lam, s) - 1e-14


@given(st.integers(1, 5), st.floats(0.0, 20.0), st.lists(unit, min_size=5, max_size=5), st.data())
def test_analytic_best_response_dominates_grid(n, lam, raw, data):
    pos = raw[:n]
    i = data.draw(st.integers(0, n - 1))
    cfg = GameConfig(n, lam)
    a = best_response(cfg, pos, i)
    g = grid_best_response(cfg, pos, i, points=2001)
    assert a.best_payoff >= g.best_payoff - 1e-12
    assert a.gain >= 0.0
