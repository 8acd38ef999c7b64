"""Classical flux noise f(t) sigma_z^a on the ETLS.

f(t) is a stationary Ornstein-Uhlenbeck process in linear GHz with
autocovariance sigma_f^2 exp(-|t|/tau_c) and spectral density
S(w) = 2 sigma_f^2 tau_c / (1 + w^2 tau_c^2).

Trajectory k of an ensemble is seeded with base_seed + k, so ensembles are
identical regardless of how they are split up.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import constants
from scipy.integrate import trapezoid
from scipy.optimize import curve_fit
from scipy.signal import lfilter

from app.errors import ConvergenceError, PreconditionError
from app.models.schemas import EnsembleResult, NoiseModel, NoiseTrajectory, PulseSpec, SystemParams, T2Estimate
from app.physics import dynamics, model
from app.utils import operators as ops

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
MAX_STEP_FRACTION = 10  # dt <= tau_c / 10
MIN_DECAY = 0.1
DEFAULT_PROBE_WINDOW = 1000.0
MAX_PROBE_WINDOW = 20000.0


def _check_step(model_: NoiseModel, dt: float) -> None:
    if dt <= 0.0 or dt > model_.tau_c / MAX_STEP_FRACTION * (1.0 + 1e-9):
        raise PreconditionError(
            f"noise step dt = {dt} ns is too coarse for tau_c = {model_.tau_c} ns (need dt <= tau_c/{MAX_STEP_FRACTION})"
        )


def _n_steps(dt: float, T: float) -> int:
    return max(1, int(math.ceil(T / dt - 1e-9)))


def _ou_filter(model_: NoiseModel, dt: float, x0: np.ndarray, kicks: np.ndarray) -> np.ndarray:
    # exact discretization: x[k+1] = a x[k] + sigma sqrt(1 - a^2) xi[k]
    a = math.exp(-dt / model_.tau_c)
    b = model_.sigma_f * math.sqrt(1.0 - a * a)
    tail = lfilter([b], [1.0, -a], kicks, axis=-1, zi=(a * x0)[..., None])[0]
    return np.concatenate([x0[..., None], tail], axis=-1)


def sample_noise(model_: NoiseModel, dt: float, T: float, seed: int) -> NoiseTrajectory:
    """Samples f(k dt) for k = 0..ceil(T/dt), started from the stationary law."""
    _check_step(model_, dt)
    n = _n_steps(dt, T)
    rng = np.random.default_rng(seed)
    x0 = model_.sigma_f * rng.standard_normal()
    kicks = rng.standard_normal(n)
    samples = _ou_filter(model_, dt, np.array(x0), kicks)
    return NoiseTrajectory(dt=dt, samples=samples, seed=seed)


def sample_noise_ensemble(model_: NoiseModel, dt: float, T: float, seed: int, n_traj: int) -> np.ndarray:
    """Row k equals sample_noise(model_, dt, T, seed + k).samples."""
    _check_step(model_, dt)
    n = _n_steps(dt, T)
    x0 = np.empty(n_traj)
    kicks = np.empty((n_traj, n))
    for k in range(n_traj):
        rng = np.random.default_rng(seed + k)
        x0[k] = model_.sigma_f * rng.standard_normal()
        kicks[k] = rng.standard_normal(n)
    return _ou_filter(model_, dt, x0, kicks)


def spectral_density(model_: NoiseModel, omega):
    """Two-sided S(w) = 2 sigma_f^2 tau_c / (1 + w^2 tau_c^2), w in rad/ns."""
    omega = np.asarray(omega, dtype=float)
    return 2.0 * model_.sigma_f**2 * model_.tau_c / (1.0 + (omega * model_.tau_c) ** 2)


def analytic_dephasing_rate(model_: NoiseModel) -> float:
    """Motional-narrowing decay rate (1/ns) of the |0_a>-|1_a> coherence.

    The relative phase is 4 pi integral(f), so the rate is (4 pi)^2 S(0) / 2.
    """
    return float(8.0 * np.pi**2 * spectral_density(model_, 0.0))


def pulse_coherence_factor(model_: NoiseModel, rabi: float, duration: float, n_grid: int = 801) -> float:
    """Second-order estimate of how much one pi pulse shrinks |0_q 0_a><1b_q 1_a|.

    Relative to the idle branch the driven branch couples to the noise through
    1 + sz_a(t), whose two-time weight on the initial state is
    1 - cos(W t) - cos(W s) + cos(W (t - s)). Integrating it against the
    Ornstein-Uhlenbeck covariance gives the exponent; for white noise it
    reduces to exp(-Gamma T / 2).
    """
    t = np.linspace(0.0, duration, n_grid)
    lag = t[:, None] - t[None, :]
    covariance = model_.sigma_f**2 * np.exp(-np.abs(lag) / model_.tau_c)
    c = np.cos(rabi * t)
    weight = 1.0 - c[:, None] - c[None, :] + np.cos(rabi * lag)
    exponent = 0.5 * TWO_PI**2 * trapezoid(trapezoid(covariance * weight, t, axis=1), t)
    return float(math.exp(-exponent))


def thermal_excitation(frequency_ghz: float, temperature_mk: float) -> float:
    """Boltzmann population of the upper level of a two-level system."""
    if temperature_mk <= 0.0:
        return 0.0
    x = constants.h * frequency_ghz * 1e9 / (constants.k * temperature_mk * 1e-3)
    return float(math.exp(-x) / (1.0 + math.exp(-x))) if x < 700 else 0.0


def idle_immunity_check(
    c0: complex,
    c1: complex,
    params: SystemParams,
    model_: NoiseModel,
    T: float,
    n_traj: int,
    seed: int = 0,
    allow_tunneling: bool = False,
) -> float:
    """Trace distance between the noisy ensemble and the noiseless qubit state.

    The ETLS starts in |0_a> and the pair evolves under H0 + f(t) sz_a with the
    noise held constant over each step, so each step is an exact exponential.
    """
    if params.t0a != 0.0 and not allow_tunneling:
        raise PreconditionError(f"idle immunity only holds for t0a = 0 (got {params.t0a})")
    c0, c1 = dynamics.normalized_pair(c0, c1)

    storage = params.model_copy(update={"t0a": 0.0})
    s00, s10, _, _ = (s.amplitudes for s in model.dressed_states(storage))
    psi0 = c0 * s00 + c1 * s10

    dt = model_.tau_c / MAX_STEP_FRACTION
    n = _n_steps(dt, T)
    h = T / n
    f = sample_noise_ensemble(model_, h, T, seed, n_traj)

    h0 = TWO_PI * model.build_hamiltonian(params)
    hamiltonians = h0[None, None] + TWO_PI * f[:, :n, None, None] * ops.SZ_A[None, None]
    props = ops.hermitian_propagators(hamiltonians, h)

    psi = np.broadcast_to(psi0, (n_traj, 4)).copy()
    for k in range(n):
        psi = np.einsum("tij,tj->ti", props[:, k], psi)
    rho_noisy = np.einsum("ti,tj->ij", psi, psi.conj()) / n_traj

    clean = ops.hermitian_propagators(h0, T) @ psi0
    distance = ops.trace_distance(ops.trace_out_etls(rho_noisy), ops.trace_out_etls(clean))
    logger.debug("idle immunity: %d trajectories over %.4g ns, distance %.3e", n_traj, T, distance)
    return distance


def _ensemble_grid(model_: NoiseModel, pulse: PulseSpec):
    """Step that divides the pulse evenly and resolves the noise."""
    n_pulse = max(100, int(math.ceil(pulse.duration / (model_.tau_c / MAX_STEP_FRACTION) - 1e-9)))
    return n_pulse, pulse.duration / n_pulse


def _rotating_initial(c0: complex, c1: complex) -> np.ndarray:
    psi = np.zeros(4, dtype=complex)
    psi[dynamics.ROTATING_INDEX["0q_0a"]] = c0
    psi[dynamics.ROTATING_INDEX["1q_0a"]] = c1
    return psi


def _rotating_ideal(c0: complex, c1: complex, conditional: bool) -> np.ndarray:
    psi = np.zeros(4, dtype=complex)
    if conditional:
        psi[dynamics.ROTATING_INDEX["0q_0a"]] = c0
    else:
        psi[dynamics.ROTATING_INDEX["0bq_1a"]] = 1j * c0
    psi[dynamics.ROTATING_INDEX["1bq_1a"]] = 1j * c1
    return psi


def dephasing_ensemble(
    c0: complex,
    c1: complex,
    params: SystemParams,
    pulse: PulseSpec,
    model_: NoiseModel,
    n_traj: int,
    seed: int,
) -> EnsembleResult:
    """Ensemble-averaged rotating-frame density matrix after the pulse.

    The matrix is in the rotating-frame logical basis (see dynamics).
    """
    if n_traj < 1:
        raise PreconditionError("dephasing ensemble needs at least one trajectory")
    c0, c1 = dynamics.normalized_pair(c0, c1)
    n_steps, h = _ensemble_grid(model_, pulse)
    f = sample_noise_ensemble(model_, h, pulse.duration, seed, n_traj)

    # the off-resonant q0 branch is not driven in the rotating frame
    conditional = params.omega_delta > 0.0
    psi0 = _rotating_initial(c0, c1)
    final = dynamics.rotating_frame_batch(
        psi0, pulse.rabi, f, h, n_steps, phase=pulse.phase, conditional=conditional
    )[:, -1]

    rho = np.einsum("ti,tj->ij", final, final.conj()) / n_traj
    ideal = _rotating_ideal(c0, c1, conditional)
    return EnsembleResult(
        density_matrix=rho,
        fidelity=ops.pure_state_fidelity(ideal, rho),
        purity=ops.purity(rho),
        n_traj=n_traj,
    )


def _exp_decay(t, amplitude, t2):
    return amplitude * np.exp(-t / t2)


def estimate_T2(
    model_: NoiseModel,
    params: SystemParams,
    pulse: PulseSpec,
    n_traj: int = 400,
    seed: int = 0,
    probe_window: Optional[float] = None,
    n_points: int = 41,
) -> T2Estimate:
    """1/e time of the |0_q 0_a><1b_q 1_a| coherence after the entangling pulse.

    The pulse is applied to (|0_q> + |1_q>)/sqrt(2), then the drive is switched
    off and the ensemble coherence is recorded versus idle time. Without
    coupling both branches flip, and the tracked coherence is
    |0b_q 1_a><1b_q 1_a|.
    """
    rate = analytic_dephasing_rate(model_)
    if probe_window is None:
        if rate > 0.0:
            probe_window = float(np.clip(2.0 / rate, 10.0 * pulse.duration, MAX_PROBE_WINDOW))
        else:
            probe_window = DEFAULT_PROBE_WINDOW

    n_pulse, h = _ensemble_grid(model_, pulse)
    n_idle = int(math.ceil(probe_window / h - 1e-9))
    n_steps = n_pulse + n_idle
    records = n_pulse + np.unique(np.linspace(0, n_idle, n_points).astype(int))

    f = sample_noise_ensemble(model_, h, n_steps * h, seed, n_traj)
    c = 1.0 / np.sqrt(2.0)
    psi0 = _rotating_initial(c, c)
    conditional = params.omega_delta > 0.0
    if not conditional:
        logger.info("omega_delta = 0: coherence is tracked on the unconditional flip")
    states = dynamics.rotating_frame_batch(
        psi0, pulse.rabi, f, h, n_steps, n_pulse, pulse.phase, records, conditional=conditional
    )

    i0 = dynamics.ROTATING_INDEX["0q_0a" if conditional else "0bq_1a"]
    i11 = dynamics.ROTATING_INDEX["1bq_1a"]
    coherence = np.abs(np.mean(states[:, :, i0] * states[:, :, i11].conj(), axis=0))
    times = (records - n_pulse) * h

    s_zero = float(spectral_density(model_, 0.0))
    s_rabi = float(spectral_density(model_, pulse.rabi))
    common = dict(
        probe_window=probe_window,
        times=times,
        coherence=coherence,
        analytic_rate=rate,
        spectral_density_zero=s_zero,
        spectral_density_rabi=s_rabi,
    )

    if coherence[0] == 0.0 or coherence[-1] / coherence[0] > 1.0 - MIN_DECAY:
        logger.info("coherence decayed by less than %.0f%% over %.4g ns; reporting a lower bound", 100 * MIN_DECAY, probe_window)
        return T2Estimate(t2=probe_window, lower_bound=True, **common)

    try:
        (amplitude, t2), _ = curve_fit(
            _exp_decay,
            times,
            coherence,
            p0=[coherence[0], probe_window / 2.0],
            bounds=([0.0, 1e-6], [np.inf, np.inf]),
        )
    except RuntimeError as exc:
        raise ConvergenceError(f"exponential fit of the coherence failed: {exc}") from exc

    logger.debug("T2 fit: %.4g ns (analytic %.4g ns)", t2, 1.0 / rate if rate else math.inf)
    return T2Estimate(t2=float(t2), lower_bound=False, **common)
