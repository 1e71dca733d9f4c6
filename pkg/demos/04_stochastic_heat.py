"""Solve a stochastic heat equation with a nonlocal operator and check its second moments.

Run: python3 demos/04_stochastic_heat.py
"""
import math

from bernstein_lp import parabolic, spde
from bernstein_lp.catalog import make
from bernstein_lp.spectral import SpaceTimeField, TorusGrid

phi = make("stable", alpha=1.2)
grid = TorusGrid(1, 2 * math.pi, 32)
T, M = 1.0, 64
f_src, g_src = parabolic.random_sources(2, 1, 3, T, seed=4)
f = f_src.sample(grid, M, T)
problem = spde.SpdeProblem(phi, grid, T, M, SpaceTimeField(grid, f.dt, f.values[:, :1]),
                           g_src.sample(grid, M, T))

iso = spde.ito_isometry_check(problem, 5000, seed=1)
e = iso["energy_T"]
print(f"E||u(T)||^2: Monte Carlo {e['monte_carlo']:.5f} +- {e['std_err']:.5f}, exact {e['exact']:.5f}")

rep = spde.apriori_estimate_report(problem, 4, 500, seed=2)
print(f"a priori ratio at p=4: {rep['n_hat']:.4f}")
