"""
Where can each criterion succeed?
=================================

Classification of (nbar, eta) cells into classical, grey (nonclassical in
principle, hidden by reconstruction noise) and black (measurably
nonclassical), with the fast Fisher-information noise model for N = 10^5
homodyne samples.
"""

# %%
import numpy as np

from spats_lab.regions import FisherNoise, region_map

SYMBOL = {"classical": ".", "grey": "o", "black": "#"}
noise = FisherNoise(samples=100_000)

# %%
for criterion in ("wigner0", "klyshko", "ep"):
    m = region_map(criterion, noise, nbar_max=4.0, nbar_steps=17, eta_steps=21)
    print(f"\n{criterion}   (rows: eta from 1 down to 0, columns: nbar from 0 to 4)")
    for j in range(m.eta_grid.size - 1, -1, -2):
        print(f"eta={m.eta_grid[j]:.2f} " + "".join(SYMBOL[lab] for lab in m.labels[:, j]))
    print("black up to nbar =", m.black_boundary(0.62), "at eta = 0.62")

# %%
# With a hundred times more data the grey zone shrinks.
for samples in (10_000, 1_000_000):
    m = region_map("wigner0", FisherNoise(samples), nbar_grid=np.linspace(0, 4, 41), eta_grid=[0.62])
    print(f"N={samples:>9}: wigner0 black up to nbar = {m.black_boundary(0.62)}")
