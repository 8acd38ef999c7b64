import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from app.errors import PreconditionError
from app.models.schemas import NoiseModel, SystemParams
from app.physics import dynamics, noise

REFERENCE = SystemParams(epsilon0=13.0, t0=1.0, omega_a=11.0, omega_delta=3.0)
DEFAULT = NoiseModel(sigma_f=0.0008, tau_c=10.0)
UNIT = NoiseModel(sigma_f=1.0, tau_c=1.0)
RABI = 2.0 * np.pi * 0.05
C = 1.0 / np.sqrt(2.0)


@pytest.fixture(scope="module")
def pulse():
    return dynamics.pi_pulse(REFERENCE, "q1", RABI)


@pytest.fixture(scope="module")
def long_ensemble():
    return noise.sample_noise_ensemble(UNIT, 0.1, 200.0, seed=11, n_traj=1000)


class TestSampleNoise:
    def test_grid(self):
        trajectory = noise.sample_noise(DEFAULT, 1.0, 100.0, seed=0)
        assert trajectory.samples.shape == (101,)
        assert_allclose(trajectory.times[-1], 100.0)

    def test_deterministic(self):
        a = noise.sample_noise(UNIT, 0.1, 20.0, seed=3).samples
        b = noise.sample_noise(UNIT, 0.1, 20.0, seed=3).samples
        assert_array_equal(a, b)
        assert not np.array_equal(a, noise.sample_noise(UNIT, 0.1, 20.0, seed=4).samples)

    def test_ensemble_rows_follow_seed_splitting(self):
        rows = noise.sample_noise_ensemble(UNIT, 0.1, 20.0, seed=100, n_traj=5)
        for k in range(5):
            assert_allclose(rows[k], noise.sample_noise(UNIT, 0.1, 20.0, seed=100 + k).samples, rtol=0, atol=1e-14)

    def test_rejects_coarse_step(self):
        with pytest.raises(PreconditionError, match="tau_c"):
            noise.sample_noise(DEFAULT, 2.0, 100.0, seed=0)

    def test_variance(self, long_ensemble):
        assert np.var(long_ensemble) == pytest.approx(1.0, rel=0.05)

    def test_autocovariance(self, long_ensemble):
        for lag_steps, expected in ((10, np.exp(-1.0)), (20, np.exp(-2.0))):
            covariance = np.mean(long_ensemble[:, :-lag_steps] * long_ensemble[:, lag_steps:])
            assert covariance == pytest.approx(expected, rel=0.1)

    def test_periodogram_matches_lorentzian(self):
        dt, window = 0.05, 100.0
        rows = noise.sample_noise_ensemble(UNIT, dt, window, seed=21, n_traj=1000)
        n = rows.shape[1]
        periodogram = (dt / n) * np.mean(np.abs(np.fft.rfft(rows, axis=1)) ** 2, axis=0)
        omega = 2.0 * np.pi * np.fft.rfftfreq(n, d=dt)
        band = (omega > 0.1) & (omega <= 3.0)
        ratio = periodogram[band] / noise.spectral_density(UNIT, omega[band])
        assert np.all(np.abs(ratio - 1.0) < 0.2)


class TestSpectralDensity:
    def test_lorentzian(self):
        assert noise.spectral_density(UNIT, 0.0) == pytest.approx(2.0)
        assert noise.spectral_density(UNIT, 1.0) == pytest.approx(1.0)

    def test_analytic_rate(self):
        rate = noise.analytic_dephasing_rate(DEFAULT)
        assert rate == pytest.approx(16 * np.pi**2 * 0.0008**2 * 10.0)
        assert 1.0 / rate == pytest.approx(990.0, rel=0.01)


class TestThermalExcitation:
    def test_cold_etls(self):
        assert noise.thermal_excitation(11.0, 20.0) < 1e-10

    def test_hot_limit(self):
        assert noise.thermal_excitation(11.0, 1e9) == pytest.approx(0.5, abs=1e-3)
        assert noise.thermal_excitation(11.0, 0.0) == 0.0


class TestPulseCoherenceFactor:
    def test_noiseless(self):
        assert noise.pulse_coherence_factor(NoiseModel(sigma_f=0.0, tau_c=10.0), RABI, 10.0) == 1.0

    def test_white_noise_limit(self):
        tau_c, duration = 0.05, np.pi / RABI
        model_ = NoiseModel(sigma_f=np.sqrt(0.2 / (16 * np.pi**2 * tau_c * duration)), tau_c=tau_c)
        rate = noise.analytic_dephasing_rate(model_)
        assert rate * duration == pytest.approx(0.2)
        factor = noise.pulse_coherence_factor(model_, RABI, duration)
        assert factor == pytest.approx(np.exp(-0.5 * rate * duration), rel=0.02)


class TestIdleImmunity:
    def test_storage_does_not_decohere_the_qubit(self):
        distance = noise.idle_immunity_check(C, C, REFERENCE, DEFAULT, 100.0, n_traj=50, seed=1)
        assert distance <= 1e-9

    def test_strong_noise_still_immune(self):
        distance = noise.idle_immunity_check(0.6, 0.8, REFERENCE, NoiseModel(sigma_f=0.5, tau_c=1.0), 20.0, 20, seed=2)
        assert distance <= 1e-9

    def test_requires_storage_configuration(self):
        with pytest.raises(PreconditionError, match="t0a"):
            noise.idle_immunity_check(C, C, REFERENCE.model_copy(update={"t0a": 0.1}), DEFAULT, 10.0, 5)

    def test_tunneling_breaks_immunity(self):
        params = REFERENCE.model_copy(update={"t0a": 0.5})
        distances = [
            noise.idle_immunity_check(C, C, params, DEFAULT, T, n_traj=50, seed=1, allow_tunneling=True)
            for T in (10.0, 50.0, 100.0)
        ]
        assert distances[0] > 1e-6
        assert distances[-1] > 1e-4
        assert distances == sorted(distances)


class TestDephasingEnsemble:
    def check_density_matrix(self, rho):
        assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.eigvalsh(rho).min() >= -1e-10

    def test_noiseless_is_ideal(self, pulse):
        result = noise.dephasing_ensemble(C, C, REFERENCE, pulse, NoiseModel(sigma_f=0.0, tau_c=10.0), 4, seed=0)
        self.check_density_matrix(result.density_matrix)
        assert result.fidelity == pytest.approx(1.0, abs=1e-10)
        assert result.purity == pytest.approx(1.0, abs=1e-10)

    def test_default_noise_barely_matters(self, pulse):
        result = noise.dephasing_ensemble(C, C, REFERENCE, pulse, DEFAULT, 100, seed=0)
        self.check_density_matrix(result.density_matrix)
        assert result.fidelity >= 0.99

    def test_strong_noise_dephases(self, pulse):
        result = noise.dephasing_ensemble(C, C, REFERENCE, pulse, NoiseModel(sigma_f=0.05, tau_c=1.0), 200, seed=0)
        self.check_density_matrix(result.density_matrix)
        assert result.fidelity < 0.95
        assert result.purity < 0.95

    def test_coherence_loss_when_t2_equals_pulse(self, pulse):
        tau_c = 1.0
        model_ = NoiseModel(sigma_f=1.0 / (4.0 * np.pi * np.sqrt(tau_c * pulse.duration)), tau_c=tau_c)
        assert 1.0 / noise.analytic_dephasing_rate(model_) == pytest.approx(pulse.duration)
        expected = noise.pulse_coherence_factor(model_, pulse.rabi, pulse.duration)
        assert 0.6 < expected < 0.7
        rho = noise.dephasing_ensemble(C, C, REFERENCE, pulse, model_, 1000, seed=0).density_matrix
        i00, i11 = dynamics.ROTATING_INDEX["0q_0a"], dynamics.ROTATING_INDEX["1bq_1a"]
        assert 2.0 * abs(rho[i00, i11]) == pytest.approx(expected, abs=0.05)

    def test_deterministic(self, pulse):
        a = noise.dephasing_ensemble(C, C, REFERENCE, pulse, DEFAULT, 20, seed=9).density_matrix
        b = noise.dephasing_ensemble(C, C, REFERENCE, pulse, DEFAULT, 20, seed=9).density_matrix
        assert_array_equal(a, b)


class TestEstimateT2:
    def test_default_calibration(self, pulse):
        estimate = noise.estimate_T2(DEFAULT, REFERENCE, pulse, n_traj=400, seed=0)
        assert not estimate.lower_bound
        assert 100.0 <= estimate.t2 <= 10_000.0
        assert estimate.t2 > 50 * pulse.duration
        assert estimate.t2 == pytest.approx(1.0 / estimate.analytic_rate, rel=0.3)

    def test_noiseless_reports_lower_bound(self, pulse):
        estimate = noise.estimate_T2(NoiseModel(sigma_f=0.0, tau_c=10.0), REFERENCE, pulse, n_traj=4, seed=0)
        assert estimate.lower_bound
        assert estimate.t2 == pytest.approx(noise.DEFAULT_PROBE_WINDOW)
        assert_allclose(estimate.coherence, 0.5, atol=1e-10)

    def test_rate_scales_with_noise_power(self, pulse):
        weak = noise.estimate_T2(DEFAULT, REFERENCE, pulse, n_traj=400, seed=0)
        strong = noise.estimate_T2(NoiseModel(sigma_f=2 * DEFAULT.sigma_f, tau_c=DEFAULT.tau_c), REFERENCE, pulse, n_traj=400, seed=0)
        assert not strong.lower_bound
        assert weak.t2 / strong.t2 == pytest.approx(4.0, rel=0.3)

    def test_without_coupling_tracks_unconditional_flip(self):
        params = REFERENCE.model_copy(update={"omega_delta": 0.0})
        estimate = noise.estimate_T2(DEFAULT, params, dynamics.pi_pulse(params, "q1", RABI), n_traj=50, seed=0)
        assert estimate.lower_bound
        assert_allclose(estimate.coherence, estimate.coherence[0], rtol=1e-9)
        assert estimate.coherence[0] == pytest.approx(0.5, abs=0.01)
