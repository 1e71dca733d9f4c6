"""Walk through the catalog, then compare a heat kernel against its closed form.

Run: python3 demos/01_catalog_and_kernels.py
"""
import math

import numpy as np

from bernstein_lp import catalog, kernels

print("scaling exponents of every catalog entry")
for name in catalog.ENTRY_NAMES:
    ex = catalog.check_scaling_conditions(catalog.make(name))
    print(f"  {name:13s} delta1={ex.delta1:.4f} delta2={ex.delta2:.4f} delta3={ex.delta3:.4f}")

# lam^{1/2} subordinates Brownian motion to the Cauchy process
cauchy = catalog.make("stable", alpha=1.0)
r = np.array([0.0, 0.5, 2.0, 10.0])
table = kernels.density(cauchy, 1, 1.0, r)
print("\nCauchy density at t=1")
for ri, v in zip(r, table.values):
    print(f"  r={ri:5.1f}  computed={v:.10f}  closed form={1 / (math.pi * (1 + ri * ri)):.10f}")

phi = catalog.make("two_power")
print("\ntwo_power kernel mass at t=1:", kernels.normalization_check(phi, 1, 1.0)["total"])
rep = kernels.verify_kernel_upper_bound(phi, 1, 1.0)
print(f"kernel upper bound constant {rep.n_hat:.4f}, drift under refinement {rep.refinement_drift:.2%}")
