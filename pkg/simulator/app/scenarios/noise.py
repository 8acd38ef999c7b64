import logging

import numpy as np

from app.models.config import RunConfig
from app.models.schemas import Report
from app.physics import dynamics, noise
from app.scenarios.router import ScenarioRouter

logger = logging.getLogger(__name__)

router = ScenarioRouter()

IDLE_WINDOW_NS = 100.0
DEFAULT_SPAN = 100  # correlation times of noise dumped by default


@router.scenario("noise")
def run_noise(config: RunConfig) -> Report:
    """Noise trajectory, spectral density and the dephasing diagnostics."""
    params = config.qubit.to_params()
    model_ = config.noise.to_model()
    seed = config.run.seed
    dt = config.run.dt_ns or model_.tau_c / noise.MAX_STEP_FRACTION
    T = config.run.t_ns or DEFAULT_SPAN * model_.tau_c

    trajectory = noise.sample_noise(model_, dt, T, seed)
    n = trajectory.samples.size
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, d=dt)
    periodogram = dt / n * np.abs(np.fft.rfft(trajectory.samples)) ** 2

    pulse = dynamics.pi_pulse(params, config.pulse.target, config.pulse.rabi)
    t2 = noise.estimate_T2(model_, params, pulse, n_traj=config.run.n_traj, seed=seed)
    immunity = noise.idle_immunity_check(
        1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0), params, model_, IDLE_WINDOW_NS, config.run.n_traj, seed=seed
    )
    logger.info(
        "T2 %s %.4g ns (analytic %.4g ns), idle trace distance %.2e",
        ">=" if t2.lower_bound else "=",
        t2.t2,
        1.0 / t2.analytic_rate if t2.analytic_rate else float("inf"),
        immunity,
    )

    return Report(
        scenario="noise",
        scalars={
            "sigma_f_ghz": model_.sigma_f,
            "tau_c_ns": model_.tau_c,
            "dt_ns": dt,
            "sample_variance": float(np.var(trajectory.samples)),
            "spectral_density_zero": t2.spectral_density_zero,
            "spectral_density_rabi": t2.spectral_density_rabi,
            "analytic_dephasing_rate": t2.analytic_rate,
            "t2_ns": t2.t2,
            "t2_lower_bound": t2.lower_bound,
            "t2_over_pulse": t2.t2 / pulse.duration,
            "pulse_coherence_factor": noise.pulse_coherence_factor(model_, pulse.rabi, pulse.duration),
            "probe_window_ns": t2.probe_window,
            "idle_trace_distance": immunity,
            "thermal_excitation": noise.thermal_excitation(params.omega_a, config.noise.temperature_mk),
        },
        table={"time_ns": trajectory.times, "f_ghz": trajectory.samples},
        series={
            "omega_rad_per_ns": omega,
            "periodogram": periodogram,
            "spectral_density": noise.spectral_density(model_, omega),
            "coherence_time_ns": t2.times,
            "coherence": t2.coherence,
        },
    )
