import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spats_lab.errors import DomainError, InvalidDimensionError, TruncationError, UnsupportedInputError
from spats_lab.fock import FockDensityMatrix
from spats_lab.states import (
    StateDescriptor,
    add_photon,
    fock_state,
    loss_channel,
    lossy_spats,
    mean_photon_from_trigger_ratio,
    spats,
    thermal_state,
)


def bose_einstein(nbar, n):
    return nbar**n / (1 + nbar) ** (n + 1)


def random_diag(rng, dim=30, support=20):
    p = np.zeros(dim)
    p[:support] = rng.dirichlet(np.ones(support))
    return FockDensityMatrix.from_populations(p)


class TestThermal:
    def test_zero_is_vacuum(self):
        np.testing.assert_array_equal(thermal_state(0.0, 5).populations, [1, 0, 0, 0, 0])

    def test_nbar_one(self):
        p = thermal_state(1.0, 40).populations
        np.testing.assert_allclose(p[:3], [0.5, 0.25, 0.125], rtol=1e-11)

    @pytest.mark.parametrize("nbar", [0.08, 0.53, 1.15, 2.5])
    def test_matches_formula_and_mean(self, nbar):
        rho = thermal_state(nbar, 40)
        n = np.arange(40)
        np.testing.assert_allclose(rho.populations, bose_einstein(nbar, n) / bose_einstein(nbar, n).sum())
        assert rho.mean_photon_number() == pytest.approx(nbar, rel=0.01)
        assert rho.tail_mass_bound == pytest.approx((nbar / (1 + nbar)) ** 40)

    def test_default_truncation_tail(self):
        assert thermal_state(2.5).tail_mass_bound < 1e-5

    def test_negative(self):
        with pytest.raises(DomainError):
            thermal_state(-0.1)


class TestFock:
    @pytest.mark.parametrize("n", [0, 1, 3])
    def test_projector(self, n):
        rho = fock_state(n, 6)
        expected = np.zeros((6, 6))
        expected[n, n] = 1
        np.testing.assert_array_equal(rho.elements, expected)
        assert rho.trace == 1.0

    def test_out_of_range(self):
        with pytest.raises(InvalidDimensionError):
            fock_state(6, 6)


class TestAddPhoton:
    def test_vacuum_to_one(self):
        np.testing.assert_allclose(add_photon(fock_state(0, 5)).populations, [0, 1, 0, 0, 0])

    def test_one_to_two(self):
        np.testing.assert_allclose(add_photon(fock_state(1, 5)).populations, [0, 0, 1, 0, 0])

    @pytest.mark.parametrize("nbar", [0.08, 0.53, 1.0, 1.15, 2.0])
    def test_thermal_gives_spats(self, nbar):
        added = add_photon(thermal_state(nbar, 60))
        np.testing.assert_allclose(added.elements, spats(nbar, 60).elements, atol=1e-12, rtol=0)
        assert added.populations[0] == 0.0
        assert added.trace == pytest.approx(1.0, abs=1e-12)

    def test_headroom(self):
        with pytest.raises(TruncationError):
            add_photon(fock_state(3, 4))


class TestSpats:
    def test_zero_limit(self):
        np.testing.assert_array_equal(spats(0.0, 5).populations, [0, 1, 0, 0, 0])

    def test_small_nbar_approaches_single_photon(self):
        assert spats(1e-6, 20).populations[1] == pytest.approx(1 / (1 + 1e-6) ** 2, rel=1e-9)

    def test_nbar_one(self):
        p = spats(1.0, 60).populations
        np.testing.assert_allclose(p[1:4], [1 / 4, 1 / 4, 3 / 16], rtol=1e-12)
        n = np.arange(1, 60)
        np.testing.assert_allclose(p[1:], n * 2.0 ** (-n - 1) / (n * 2.0 ** (-n - 1)).sum())

    @pytest.mark.parametrize("nbar", [0.0, 0.08, 1.15, 3.0])
    def test_no_vacuum(self, nbar):
        assert spats(nbar, 80).populations[0] == 0.0

    def test_tail_bound(self):
        # closed-form tail vs brute-force sum on a much larger space
        nbar, dim = 1.15, 25
        x = nbar / (1 + nbar)
        n = np.arange(dim, 3000)
        brute = np.sum(n * x**n / (nbar * (nbar + 1)))
        assert spats(nbar, dim).tail_mass_bound == pytest.approx(brute, rel=1e-10)


class TestLoss:
    def test_identity(self, rng):
        rho = random_diag(rng)
        np.testing.assert_array_equal(loss_channel(rho, 1.0).populations, rho.populations)

    def test_to_vacuum(self, rng):
        p = loss_channel(random_diag(rng), 0.0).populations
        assert p[0] == pytest.approx(1.0) and np.all(p[1:] == 0)

    def test_lossy_single_photon(self):
        np.testing.assert_allclose(loss_channel(fock_state(1, 5), 0.62).populations[:2], [0.38, 0.62], atol=1e-15)

    def test_binomial_brute_force(self):
        from math import comb

        p = spats(0.7, 30).populations
        eta = 0.37
        expected = [sum(comb(m, n) * eta**n * (1 - eta) ** (m - n) * p[m] for m in range(n, 30)) for n in range(30)]
        np.testing.assert_allclose(loss_channel(FockDensityMatrix.from_populations(p), eta).populations, expected, atol=1e-15)

    def test_rejects_coherences(self):
        m = np.array([[0.5, 0.1], [0.1, 0.5]])
        with pytest.raises(UnsupportedInputError):
            loss_channel(FockDensityMatrix(m), 0.5)

    @pytest.mark.parametrize("eta", [-0.1, 1.1])
    def test_eta_range(self, eta):
        with pytest.raises(DomainError):
            loss_channel(fock_state(1, 3), eta)

    @given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_composition(self, e1, e2, seed):
        rho = random_diag(np.random.default_rng(seed))
        twice = loss_channel(loss_channel(rho, e1), e2).populations
        once = loss_channel(rho, e1 * e2).populations
        np.testing.assert_allclose(twice, once, atol=1e-12, rtol=0)

    @given(st.floats(0, 1), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_mean_contraction_and_trace(self, eta, seed):
        rho = random_diag(np.random.default_rng(seed))
        out = loss_channel(rho, eta)
        assert out.mean_photon_number() == pytest.approx(eta * rho.mean_photon_number(), abs=1e-10)
        assert out.trace == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(0, 4), st.floats(0, 0.999))
    @settings(max_examples=50, deadline=None)
    def test_vacuum_leaks_in(self, nbar, eta):
        ideal = spats(nbar, 80)
        p0 = lossy_spats(nbar, eta, 80).populations[0]
        assert p0 > 0
        assert p0 == pytest.approx(np.sum((1 - eta) ** np.arange(80) * ideal.populations), rel=1e-10)


class TestTriggerRatio:
    @pytest.mark.parametrize("inj,blk,nbar", [(1.0, 1.0, 0.0), (2.15, 1.0, 1.15), (1.08, 1.0, 0.08), (4300.0, 2000.0, 1.15)])
    def test_values(self, inj, blk, nbar):
        assert mean_photon_from_trigger_ratio(inj, blk) == pytest.approx(nbar, abs=1e-12)

    def test_ratio_below_one(self):
        with pytest.raises(DomainError):
            mean_photon_from_trigger_ratio(0.9, 1.0)


class TestDescriptor:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("spats(nbar=1.15, eta=0.62, dim=40)", StateDescriptor("spats", 1.15, 0.62, 40)),
            ("  SPATS ( NBAR = 0.08 ,ETA=0.62 )", StateDescriptor("spats", 0.08, 0.62)),
            ("vacuum", StateDescriptor("vacuum")),
            ("fock(1, eta=0.62)", StateDescriptor("fock", eta=0.62, n=1)),
            ("thermal(1.0, eta=1)", StateDescriptor("thermal", 1.0, 1.0)),
        ],
    )
    def test_parse(self, text, expected):
        assert StateDescriptor.parse(text) == expected

    def test_round_trip(self):
        d = StateDescriptor("spats", 1.15, 0.62, 40)
        assert StateDescriptor.parse(str(d)) == d
        assert str(d) == "spats(nbar=1.15, eta=0.62, dim=40)"

    @pytest.mark.parametrize("text", ["squeezed(r=1)", "spats(nbar=-1)", "spats(eta=2)", "spats(foo=1)", "spats(nbar=x)", "fock(1, 2)"])
    def test_invalid(self, text):
        with pytest.raises((DomainError, InvalidDimensionError)):
            StateDescriptor.parse(text)

    def test_build_applies_loss(self):
        rho = StateDescriptor.parse("fock(n=1, eta=0.62, dim=5)").build()
        np.testing.assert_allclose(rho.populations[:2], [0.38, 0.62])
