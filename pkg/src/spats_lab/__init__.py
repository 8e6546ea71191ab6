"""Simulation and nonclassicality analysis of single-photon-added thermal states."""

from .criteria import (
    CriterionReport,
    beamsplitter_with_vacuum,
    entanglement_potential,
    klyshko_B,
    rv_first_order,
    rv_second_order,
    wigner0_test,
)
from .fock import (
    FockDensityMatrix,
    TwoModeDensityMatrix,
    annihilation_matrix,
    eigenvalues_hermitian,
    partial_transpose,
    trace_norm,
)
from .homodyne import (
    CharacteristicCurve,
    QuadratureDataset,
    empirical_characteristic,
    hermite_psi,
    quadrature_pdf,
    sample_quadratures,
    vacuum_characteristic,
)
from .phasespace import (
    p_function_spats,
    wigner_from_diagonal,
    wigner_origin,
    wigner_spats_ideal,
    wigner_spats_lossy,
)
from .pipeline import analyze
from .regions import RegionMap, classify_cell, noise_sigma, region_map
from .states import (
    StateDescriptor,
    add_photon,
    fock_state,
    loss_channel,
    lossy_spats,
    mean_photon_from_trigger_ratio,
    spats,
    thermal_state,
)
from .tomography import DiagonalEstimate, fisher_errors, likelihood, maxlik_diagonal

__version__ = "0.1.0"
