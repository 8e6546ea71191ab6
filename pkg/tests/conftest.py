import numpy as np
import pytest

from spats_lab.homodyne import sample_quadratures
from spats_lab.states import fock_state, loss_channel, lossy_spats


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def lossy_single_photon_data():
    rho = loss_channel(fock_state(1, 40), 0.62)
    return rho, sample_quadratures(rho, 100_000, seed=11)


@pytest.fixture(scope="session")
def spats_053_data():
    rho = lossy_spats(0.53, 0.62, 60)
    return rho, sample_quadratures(rho, 100_000, seed=12)


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, message = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {message}")
