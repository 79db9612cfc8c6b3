"""Build the equilibrium of a small game and poke at it.

Three servers share a unit line that breaks at Poisson(lam) points.  We
solve for the equilibrium, look at each player's expected payoff, and
then check by brute force that nobody wants to move.
"""

from fphotelling import GameConfig, canonical_pair, expected_payoff, nash_equilibrium, verify_equilibrium
from fphotelling.deviate import best_response

cfg = GameConfig(n=3, lam=4.0)
prof = nash_equilibrium(cfg)
pair = canonical_pair(cfg)
print(f"equilibrium for n={cfg.n}, lam={cfg.lam}: {prof.positions}")
print(f"hinterland H={pair.H:.6f}, gap M={pair.M:.6f}, alpha={pair.alpha:.6f}")

for i in range(cfg.n):
    b = expected_payoff(cfg, prof, i)
    print(f"  player {i}: left {b.left:.6f} + right {b.right:.6f} = {b.total:.6f}")

# analytic check, then the grid scan that knows nothing about the structure
check = verify_equilibrium(cfg, prof, grid_oracle=True)
print(f"analytic verdict: {check.is_equilibrium}, grid verdict: {check.grid_is_equilibrium}")

# squeeze the peripheral players inward and they want to move back out
moved = (0.2, 0.5, 0.8)
for i in range(3):
    r = best_response(cfg, moved, i)
    print(f"  from {moved}: player {i} best point {r.best_point:.6f}, gain {r.gain:.2e}")
