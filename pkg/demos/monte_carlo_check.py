"""Closed forms versus simulation.

Every expected payoff in the package has a simulation twin that just
draws fault sets and measures markets.  Here both are run side by side
for a lopsided profile with a colocated pair.
"""

import numpy as np

from fphotelling import GameConfig, Profile, expected_payoffs, monte_carlo_payoffs

prof = Profile((0.1, 0.1, 0.45, 0.9))
lam = 6.0
closed = expected_payoffs(GameConfig(len(prof), lam), prof)
est = monte_carlo_payoffs(prof, lam, samples=500_000, seed=3)

print("player  position  closed     simulated   z")
for i, x in enumerate(prof):
    z = (est.mean[i] - closed[i]) / est.stderr[i]
    print(f"{i:6d}  {x:8.3f}  {closed[i]:.6f}  {est.mean[i]:.6f}  {z:+.2f}")
print(f"clients left in the dark: {1 - closed.sum():.6f} (closed form)")
print(f"max |z| = {np.max(np.abs((est.mean - closed) / est.stderr)):.2f}")
