"""
Four ways to detect nonclassicality
===================================

For the three seed temperatures of the measured states we simulate data,
reconstruct, and run the Wigner-origin, Richter-Vogel, Klyshko and
entanglement-potential tests. The Richter-Vogel tests act on the raw
quadratures; the others on the reconstruction.

Set SPATS_LAB_THREADS to limit the bootstrap's thread count.
"""

# %%
from spats_lab import analyze, lossy_spats, maxlik_diagonal, sample_quadratures
from spats_lab.criteria import entanglement_potential, klyshko_B
from spats_lab.fock import FockDensityMatrix
from spats_lab.pipeline import verdict_table
from spats_lab.states import fock_state, spats

# %%
# Noise-free reference values first.
print("EP of |1>:", entanglement_potential(fock_state(1)).value)
print("EP of 0.38|0><0| + 0.62|1><1|:", round(entanglement_potential(FockDensityMatrix.from_populations([0.38, 0.62])).value, 3))
for nbar in (0.08, 0.53, 1.15):
    print(f"ideal B(0) at nbar={nbar}: {klyshko_B(spats(nbar, 80)).value:.4f}")

# %%
# Simulated experiments. 30 bootstrap resamples keep the run short; the
# command-line default is 100.
for nbar in (0.08, 0.53, 1.15):
    data = sample_quadratures(lossy_spats(nbar, 0.62), 100_000, seed=7)
    est = maxlik_diagonal(data, bin_width=0.005, max_iter=50_000)
    reports = analyze(dataset=data, estimate=est, bootstrap_resamples=30, seed=7)
    print(f"\nnbar = {nbar}")
    print(verdict_table(reports))
