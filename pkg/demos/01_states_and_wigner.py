"""
Photon-added thermal states in phase space
==========================================

Adding one photon to a thermal field removes its vacuum component and makes
the Wigner function negative at the origin. Detector losses refill the vacuum;
below 50% efficiency the negativity is gone for every seed temperature.
"""

# %%
import numpy as np

from spats_lab import fock_state, lossy_spats, spats, thermal_state
from spats_lab.phasespace import (
    TWO_OVER_PI,
    p_function_spats,
    wigner_from_diagonal,
    wigner_grid,
    wigner_spats_ideal,
    wigner_spats_lossy,
)

np.set_printoptions(precision=4, suppress=True)

# %%
# Photon-number populations: a thermal seed with nbar = 1 and the same seed
# after one photon has been added.
print("thermal  ", thermal_state(1.0, 8).populations)
print("added    ", spats(1.0, 8).populations)

# %%
# The P function goes negative inside |alpha|^2 < nbar / (1 + nbar), so the
# state has no classical P representation for any nbar > 0.
for nbar in (0.08, 0.53, 1.15):
    r = np.sqrt(nbar / (1 + nbar))
    print(f"nbar={nbar:4}: P(0)={p_function_spats(nbar, 0):9.3f}  P changes sign at |alpha|={r:.3f}")

# %%
# Wigner function at the origin, ideal and with the detection efficiency of
# the homodyne setup, eta = 0.62.
print(f"{'nbar':>5} {'W(0) ideal':>11} {'W(0) eta=0.62':>14}")
for nbar in (0.0, 0.08, 0.53, 1.15, 3.0):
    print(f"{nbar:5.2f} {wigner_spats_ideal(nbar, 0):11.4f} {wigner_spats_lossy(nbar, 0.62, 0):14.4f}")

# %%
# The closed forms agree with a Laguerre-series evaluation from the density
# matrix, which is also what we use on reconstructed states.
alpha = 0.4 + 0.3j
print(wigner_spats_lossy(0.53, 0.62, alpha), wigner_from_diagonal(lossy_spats(0.53, 0.62), alpha))

# %%
# Efficiency scan at the origin: the sign flips at eta = 1/2 regardless of nbar.
for eta in (0.45, 0.5, 0.55):
    print(eta, [round(wigner_spats_lossy(n, eta, 0) / TWO_OVER_PI, 4) for n in (0.0, 1.0, 4.0)])

# %%
# A grid for plotting, written as x,y,w CSV (121 x 121 points on [-3, 3]^2).
grid = wigner_grid(lossy_spats(1.15, 0.62))
print("grid minimum", grid.values.min(), "at the center:", grid.values[60, 60])
grid.to_csv("wigner_spats_1.15.csv")

# %%
# Compare with the single photon through the same losses.
print("lossy |1>:", wigner_from_diagonal(lossy_spats(0.0, 0.62), 0), "=", (0.38 - 0.62) * TWO_OVER_PI)
print("vacuum   :", wigner_from_diagonal(fock_state(0, 2), 0))
