import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError
from scipy.integrate import quad

from app.errors import ConvergenceError, LocalizationError, PreconditionError
from app.models.schemas import PriorSchemeParams, SquidParams
from app.physics import squid

REFERENCE = SquidParams(l_ph=154.0, ic_ua=4.0, cj_ff=40.0, f_rf=0.4365)
HARMONIC = REFERENCE.model_copy(update={"ic_ua": 0.0})
SYMMETRIC = REFERENCE.model_copy(update={"f_rf": 0.5})


@pytest.fixture(scope="module")
def reference_solution():
    return squid.solve_spectrum(REFERENCE)


@pytest.fixture(scope="module")
def harmonic_solution():
    return squid.solve_spectrum(HARMONIC, squid.default_grid(HARMONIC, 4001), n_levels=10)


class TestDerivedEnergies:
    def test_screening_parameter(self):
        energies = squid.derived_energies(REFERENCE)
        assert energies.beta_l == pytest.approx(1.87, abs=0.01)
        assert energies.beta_l == pytest.approx(energies.e_j / energies.e_l, rel=1e-12)

    def test_josephson_to_charging_ratio(self):
        energies = squid.derived_energies(REFERENCE)
        assert 3600 <= energies.e_j / energies.e_c <= 4600

    def test_no_junction(self):
        energies = squid.derived_energies(HARMONIC)
        assert energies.e_j == 0.0
        assert energies.beta_l == 0.0

    def test_plasma_frequency(self):
        energies = squid.derived_energies(REFERENCE)
        assert squid.plasma_frequency(REFERENCE) == pytest.approx(np.sqrt(8 * energies.e_c * energies.e_l), rel=1e-9)

    def test_rejects_nonpositive_flux_bias(self):
        with pytest.raises(ValidationError):
            SquidParams(l_ph=154.0, ic_ua=4.0, cj_ff=40.0, f_rf=0.0)


class TestPotential:
    def test_pure_inductor_is_a_parabola(self):
        grid = squid.default_grid(HARMONIC, 4001)
        u = squid.potential(HARMONIC, grid)
        assert int(np.argmin(u)) == 2000
        assert grid[2000] == pytest.approx(2 * np.pi * HARMONIC.f_rf)

    def test_symmetric_at_half_flux(self):
        x = np.linspace(0.0, 1.5 * np.pi, 2001)
        grid = np.concatenate([np.pi - x[::-1], np.pi + x[1:]])
        u = squid.potential(SYMMETRIC, grid)
        assert_allclose(u, u[::-1], rtol=1e-12, atol=1e-9)

    def test_double_well(self):
        grid = squid.default_grid(REFERENCE)
        u = squid.potential(REFERENCE, grid)
        minima = squid.local_minima(u)
        assert minima.size == 2
        assert abs(u[minima[0]] - u[minima[1]]) > 100.0

    def test_rejects_short_grid(self):
        with pytest.raises(PreconditionError, match="cover"):
            squid.potential(REFERENCE, np.linspace(0.0, 3.0, 2000))

    def test_rejects_sparse_grid(self):
        with pytest.raises(PreconditionError, match="points"):
            squid.potential(REFERENCE, squid.default_grid(REFERENCE, 500))


class TestSolveSpectrum:
    def test_harmonic_spacing(self, harmonic_solution):
        spacing = np.diff(harmonic_solution.energies)
        assert_allclose(spacing, squid.plasma_frequency(HARMONIC), rtol=0.01)

    def test_orthonormal(self, reference_solution):
        psi = reference_solution.wavefunctions
        assert_allclose(psi.T @ psi * reference_solution.spacing, np.eye(psi.shape[1]), atol=1e-8)

    def test_energies_nondecreasing(self, reference_solution):
        assert np.all(np.diff(reference_solution.energies) >= 0)

    def test_node_count(self, harmonic_solution):
        for k in range(6):
            assert squid.sign_changes(harmonic_solution.wavefunctions[:, k]) == k

    def test_coarse_grid_fails_convergence(self):
        grid = squid.default_grid(REFERENCE, 1001)
        with pytest.raises(ConvergenceError) as info:
            squid.solve_spectrum(REFERENCE, grid, n_levels=24)
        assert info.value.coarse is not None and info.value.fine is not None

    def test_medium_grid_converges_for_lower_levels(self):
        solution = squid.solve_spectrum(REFERENCE, squid.default_grid(REFERENCE, 4001), n_levels=16)
        assert solution.energies.size == 16
        assert np.all(np.diff(solution.energies) >= 0)


class TestCharacterizeEtls:
    def test_reference_pair(self, reference_solution):
        etls = squid.characterize_etls(reference_solution, REFERENCE)
        assert etls.indices == (20, 21)
        assert etls.currents[0] * etls.currents[1] < 0
        assert etls.delta_phi == pytest.approx(0.414, abs=0.01)
        assert etls.delta_i / REFERENCE.ic_ua == pytest.approx(1.39, abs=0.03)
        assert etls.isolation == pytest.approx(46.15, abs=0.5)
        assert etls.meets_isolation_target

    def test_flux_window_is_reported(self, reference_solution):
        etls = squid.characterize_etls(reference_solution, REFERENCE)
        low, high = squid.FLUX_TARGET
        assert etls.meets_flux_target == (low <= etls.delta_phi <= high)
        assert not etls.meets_flux_target

    def test_flux_difference_follows_current(self, reference_solution):
        etls = squid.characterize_etls(reference_solution, REFERENCE)
        expected = etls.delta_i * 1e-6 * REFERENCE.l_ph * 1e-12 / squid.FLUX_QUANTUM
        assert etls.delta_phi == pytest.approx(expected, rel=1e-12)

    def test_symmetric_pair_carries_opposite_currents(self):
        solution = squid.solve_spectrum(SYMMETRIC, squid.default_grid(SYMMETRIC, 4001), n_levels=6)
        etls = squid.characterize_etls(solution, SYMMETRIC)
        assert etls.indices == (0, 1)
        assert etls.currents[0] == pytest.approx(-etls.currents[1], abs=1e-6)

    def test_single_well_has_no_pair(self, harmonic_solution):
        with pytest.raises(LocalizationError, match="well"):
            squid.characterize_etls(harmonic_solution, HARMONIC)


class TestPriorScheme:
    def test_reference_overlap(self):
        assert squid.displaced_ground_overlap(0.002, 0.01) == pytest.approx(0.99980, abs=1e-5)

    def test_no_displacement(self):
        assert squid.displaced_ground_overlap(0.0, 0.01) == 1.0

    def test_matches_quadrature(self):
        delta, var = 0.05, 0.01

        def gaussian(phi, center):
            return (2 * np.pi * var) ** -0.25 * np.exp(-((phi - center) ** 2) / (4 * var))

        half_width = delta + 40 * np.sqrt(var)
        value, _ = quad(lambda p: gaussian(p, delta) * gaussian(p, -delta), -half_width, half_width, epsabs=1e-14, epsrel=1e-13, limit=200)
        assert squid.displaced_ground_overlap(delta, var) == pytest.approx(value, abs=1e-10)

    def test_rejects_zero_variance(self):
        with pytest.raises(PreconditionError):
            squid.displaced_ground_overlap(0.002, 0.0)

    def test_reference_displacement_and_flux(self):
        prior = PriorSchemeParams()
        assert squid.prior_scheme_displacement(prior) == pytest.approx(0.0017, abs=1e-4)
        assert squid.qubit_self_flux(prior) == pytest.approx(6.8e-4, abs=0.1e-4)

    def test_distinguishability(self):
        old = squid.displaced_ground_overlap(squid.prior_scheme_displacement(PriorSchemeParams()), 0.01)
        assert squid.state_distinguishability(old) < 0.03
        assert squid.state_distinguishability(0.0) == 1.0
