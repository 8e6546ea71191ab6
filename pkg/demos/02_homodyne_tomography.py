"""
Simulated homodyne tomography
=============================

We draw 10^5 phase-averaged quadrature values from the lossy photon-added
state at nbar = 1.15, reconstruct the photon-number populations by maximum
likelihood, and compare them with the model.
"""

# %%
import numpy as np

from spats_lab import lossy_spats, maxlik_diagonal, sample_quadratures
from spats_lab.homodyne import empirical_characteristic, quadrature_pdf
from spats_lab.regions import model_populations

rho = lossy_spats(1.15, 0.62)
data = sample_quadratures(rho, 100_000, seed=7, source="spats(nbar=1.15, eta=0.62)")
print(f"{data.count} samples, variance {data.samples.var():.4f} (vacuum: 0.25)")

# %%
# Histogram against the exact quadrature density.
counts, edges = np.histogram(data.samples, bins=24, range=(-3, 3), density=True)
centers = 0.5 * (edges[1:] + edges[:-1])
for c, h, p in zip(centers[::3], counts[::3], quadrature_pdf(rho, centers[::3])):
    print(f"x={c:+5.2f}  histogram {h:.4f}  pdf {p:.4f}")

# %%
# Reconstruction: 25 populations, EM iterations on 0.005-wide bins.
est = maxlik_diagonal(data, dim=25, bin_width=0.005, max_iter=50_000)
model = model_populations(1.15, 0.62, 25)
print(f"converged={est.converged} after {est.iterations} iterations")
print(f"{'n':>2} {'p_n':>8} {'sigma':>7} {'model':>8} {'z':>6}")
for n in range(9):
    z = (est.probabilities[n] - model[n]) / est.std_errors[n]
    print(f"{n:2d} {est.probabilities[n]:8.4f} {est.std_errors[n]:7.4f} {model[n]:8.4f} {z:6.2f}")

# %%
# The likelihood never decreases along the EM path.
trace = np.array(est.loglik_trace)
print("first/last log-likelihood", trace[0], trace[-1], "min step", np.diff(trace).min())

# %%
# Characteristic function of the data, the input of the Richter-Vogel tests.
curve = empirical_characteristic(data, [0.0, 1.0, 2.0, 4.0, 8.0])
for k, g, e in zip(curve.k_values, curve.g_values, curve.std_errors):
    print(f"k={k:4.1f}  G={g:+.4f} +- {e:.4f}  vacuum {np.exp(-k * k / 8):.4f}")
