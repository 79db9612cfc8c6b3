"""Where equilibria stop existing.

Below lam_min(n) the middle servers of the equally spaced candidate
profile would rather jump into a hinterland.  The threshold is linear
in n; this script prints the table and watches the jump happen.
"""

from fphotelling import GameConfig, canonical_profile, lambda_min, threshold
from fphotelling.canonical import lambda_min_linear
from fphotelling.deviate import best_response

th = threshold()
print(f"alpha0 = {th.alpha0:.10f}, beta0 = {th.beta0:.10f}, c0 = {th.c0:.7f}")
print(" n   lam_min      linear fit")
for n in range(3, 11):
    print(f"{n:2d}   {lambda_min(n):.6f}   {lambda_min_linear(n):.6f}")

n = 4
for lam in (lambda_min(n) - 0.1, lambda_min(n) + 0.1):
    cfg = GameConfig(n, lam)
    prof = canonical_profile(cfg)
    r = best_response(cfg, prof, 1)
    print(f"lam={lam:.4f}: internal player 1 at {prof[1]:.4f} -> {r.best_point:.4f}, gain {r.gain:+.2e}")
