"""How much do faults cost the clients?

Sweeps lam for n = 4 and compares the expected disconnected fraction of
the equally spaced canonical profile (an equilibrium once lam reaches
lam_min(4), about 3.40), the fault-free equilibrium (two colocated pairs)
and the profile that minimises disconnection outright.  Then the
price of stability for n = 5 at both ends of the equilibrium range.
"""

import numpy as np

from fphotelling import (
    GameConfig,
    canonical_profile,
    expected_disconnected_fraction,
    faultfree_ne_profile,
    lambda_max,
    lambda_min,
    optimal_dc_profile,
    pos_poa,
)

y = faultfree_ne_profile(4)
print(" lam    optimum   canonical    fault-free")
for lam in np.round(np.geomspace(1.5, 20, 8), 3):
    cfg = GameConfig(4, float(lam))
    dark = [expected_disconnected_fraction(cfg, p).value for p in (optimal_dc_profile(cfg), canonical_profile(cfg), y)]
    print(f"{lam:6.3f}  {dark[0]:.5f}   {dark[1]:.5f}      {dark[2]:.5f}")

for label, lam in (("lam_min", lambda_min(5)), ("lam_max", lambda_max(5))):
    rep = pos_poa(GameConfig(5, lam))
    print(f"n=5 at {label}={lam:.4f}: transport cost {rep.c_free:.6f}, PoS {rep.pos:.4f}")
