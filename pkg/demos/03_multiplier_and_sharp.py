"""Space-time multiplier ratios and the sharp-function domination battery.

Run: python3 demos/03_multiplier_and_sharp.py
"""
import math

from bernstein_lp import parabolic, spectral
from bernstein_lp.catalog import make
from bernstein_lp.spectral import TorusGrid

phi = make("relativistic")
grid = TorusGrid(1, 2 * math.pi, 32)
srcs = parabolic.random_sources(8, 1, 3, 1.0, seed=1) + parabolic.adversarial_sources(1, 3, 1.0, 16)
for p in (2, 4):
    rep = spectral.verify_multiplier(srcs, phi, grid, 32, 1.0, p)
    print(f"multiplier p={p}: N={rep.n_hat:.4f} drift={rep.refinement_drift:.2%}")

rep = parabolic.verify_sharp_domination(srcs[:4], phi, grid, 16, 1.0)
print(f"sharp domination: N={rep.n_hat:.4f} drift={rep.refinement_drift:.2%} passed={rep.passed}")
