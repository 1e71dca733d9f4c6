"""Sample subordinate Brownian motion and test the samples against the kernel table.

Run: python3 demos/05_simulator.py
"""
from bernstein_lp import simulate
from bernstein_lp.catalog import make

cauchy = make("stable", alpha=1.0)
x = simulate.sample_sbm(cauchy, 1, 1.0, 200_000, seed=0)
print("Cauchy KS distance:", simulate.ks_distance(x, simulate.cauchy_cdf))

phi = make("two_power")
x = simulate.sample_sbm(phi, 1, 1.0, 200_000, seed=1)
out = simulate.histogram_vs_density(x, phi, 1, 1.0)
print(f"two_power chi-square p-value {out['chi2_pvalue']:.3f} over {out['bins']} bins")

x2 = simulate.sample_sbm(make("relativistic"), 2, 1.0, 50_000, seed=2)
print("isotropy p-value in 2D:", simulate.isotropy_check(x2)["pvalue"])
