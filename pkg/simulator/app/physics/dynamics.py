"""Time-domain evolution of the qubit-ETLS pair under a resonant drive.

Two integrators live here:

* ``propagate`` works in the lab frame with the full carrier
  Omega_X cos(2 pi f_d t + phase) sigma_x (no rotating-wave approximation).
  Each fixed step applies exp(-i H(t_mid) dt), evaluated by eigendecomposition.
* ``rotating_frame_propagate`` works in the frame rotating with H0, where the
  conditional drive acts on the ETLS only in the qubit-|1> subspace and the
  flux noise enters as f(t) sigma_z^a. Each step is an exact SU(2) rotation.

In the rotating frame the basis is the logical product basis with "up" meaning
logical 1: index 0 = |1b_q 1_a>, 1 = |1_q 0_a>, 2 = |0b_q 1_a>, 3 = |0_q 0_a>.
"""

import logging
import math
from typing import Literal, Optional, Union

import numpy as np
from pydantic import ValidationError

from app.errors import PreconditionError
from app.models.schemas import EntangleResult, JointState, NoiseTrajectory, PulseSpec, SystemParams, Trajectory
from app.physics import model
from app.utils import operators as ops

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
RESOLUTION_STEPS = 20  # samples per period of the fastest scale
CHUNK_STEPS = 20000

ROTATING_INDEX = {"1bq_1a": 0, "1q_0a": 1, "0bq_1a": 2, "0q_0a": 3}


def as_joint_state(state: Union[JointState, np.ndarray]) -> JointState:
    if isinstance(state, JointState):
        return state
    try:
        return JointState(amplitudes=state)
    except ValidationError as exc:
        raise PreconditionError(f"initial state rejected: {exc.errors()[0]['msg']}") from exc


def fastest_scale(params: SystemParams, pulse: Optional[PulseSpec] = None) -> float:
    """Largest of the carrier frequency and all level splittings (GHz)."""
    energies = np.linalg.eigvalsh(model.build_hamiltonian(params))
    scale = float(energies[-1] - energies[0])
    if pulse is not None:
        scale = max(scale, pulse.carrier, pulse.rabi / TWO_PI)
    return scale


def max_step(params: SystemParams, pulse: Optional[PulseSpec] = None) -> float:
    scale = fastest_scale(params, pulse)
    return math.inf if scale == 0.0 else 1.0 / (RESOLUTION_STEPS * scale)


def _step_grid(dt: float, T: float):
    if T <= 0.0:
        raise PreconditionError(f"evolution time must be positive (T = {T})")
    n_steps = max(1, int(math.ceil(T / dt - 1e-9)))
    return n_steps, T / n_steps


def _record_indices(n_steps: int, record_every: int) -> np.ndarray:
    idx = np.arange(0, n_steps + 1, max(1, int(record_every)))
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx


def _drive_operator(pulse: PulseSpec) -> np.ndarray:
    return ops.SX_A if pulse.axis == "etls" else ops.SX_Q


def propagate(
    initial: Union[JointState, np.ndarray],
    params: SystemParams,
    pulse: Optional[PulseSpec],
    dt: float,
    T: float,
    record_every: int = 1,
) -> Trajectory:
    psi = as_joint_state(initial).amplitudes.copy()
    limit = max_step(params, pulse)
    if dt > limit * (1.0 + 1e-9):
        logger.warning("step %.3g ns exceeds the resolution limit %.3g ns", dt, limit)
        raise PreconditionError(f"dt = {dt:.4g} ns does not resolve the fastest scale (need dt <= {limit:.4g} ns)")

    n_steps, h = _step_grid(dt, T)
    records = _record_indices(n_steps, record_every)
    h0 = TWO_PI * model.build_hamiltonian(params)
    logger.debug("propagating %d steps of %.4g ns (pulse=%s)", n_steps, h, pulse is not None)

    states = np.empty((records.size, 4), dtype=complex)
    states[0] = psi
    slot = 1

    if pulse is None:
        u = ops.hermitian_propagators(h0, h)
        for k in range(1, n_steps + 1):
            psi = u @ psi
            if slot < records.size and records[slot] == k:
                states[slot] = psi
                slot += 1
    else:
        drive = _drive_operator(pulse)
        for start in range(0, n_steps, CHUNK_STEPS):
            stop = min(n_steps, start + CHUNK_STEPS)
            t_mid = (np.arange(start, stop) + 0.5) * h
            amplitude = pulse.rabi * np.cos(TWO_PI * pulse.carrier * t_mid + pulse.phase) * pulse.is_active(t_mid)
            hamiltonians = h0[None, :, :] + amplitude[:, None, None] * drive[None, :, :]
            props = ops.hermitian_propagators(hamiltonians, h)
            for j, u in enumerate(props):
                psi = u @ psi
                k = start + j + 1
                if slot < records.size and records[slot] == k:
                    states[slot] = psi
                    slot += 1

    return Trajectory(times=records * h, states=states)


def pi_pulse(
    params: SystemParams,
    target_transition: Literal["q1", "q0"] = "q1",
    rabi: float = TWO_PI * 0.05,
) -> PulseSpec:
    """Conditional ETLS pi pulse.

    The carrier phase pi makes the flip act as exp(i pi/2 sigma_x^a), so
    |1_q 0_a> -> +i |1b_q 1_a> in the interaction picture.
    """
    spectrum = model.dressed_spectrum(params)
    carrier = spectrum.f_cond_q1 if target_transition == "q1" else spectrum.f_cond_q0
    return PulseSpec(carrier=carrier, rabi=rabi, duration=np.pi / rabi, phase=np.pi)


def qubit_pulse(params: SystemParams, rabi: float, angle: float = np.pi) -> PulseSpec:
    """Single-qubit rotation at omega_q with the ETLS stored in |0_a>."""
    return PulseSpec(
        carrier=model.qubit_frequency(params),
        rabi=rabi,
        duration=angle / rabi,
        axis="qubit",
    )


def to_interaction_picture(state: np.ndarray, params: SystemParams, t: float) -> np.ndarray:
    """exp(+i H0 t) |psi>, removing the free evolution (storage configuration)."""
    basis = model.dressed_basis(params)
    energies = np.array(list(model.dressed_spectrum(params).levels.values()))
    coeffs = basis.conj().T @ np.asarray(state, dtype=complex)
    return basis @ (np.exp(1j * TWO_PI * energies * t) * coeffs)


def to_rotating_frame(trajectory: Trajectory, params: SystemParams) -> np.ndarray:
    """Lab-frame trajectory expressed in the rotating-frame logical basis."""
    basis = model.dressed_basis(params)
    energies = np.array(list(model.dressed_spectrum(params).levels.values()))
    coeffs = trajectory.states @ basis.conj()
    coeffs = coeffs * np.exp(1j * TWO_PI * np.outer(trajectory.times, energies))
    order = [model.LEVEL_LABELS.index(label) for label in sorted(ROTATING_INDEX, key=ROTATING_INDEX.get)]
    return coeffs[:, order]


def rotating_basis(params: SystemParams) -> np.ndarray:
    """Unitary whose columns are the dressed states in rotating-frame order.

    U rho U^dagger maps a rotating-frame density matrix to the product basis
    at the frame's reference time.
    """
    basis = model.dressed_basis(params)
    order = [model.LEVEL_LABELS.index(label) for label in sorted(ROTATING_INDEX, key=ROTATING_INDEX.get)]
    return basis[:, order]


def normalized_pair(c0: complex, c1: complex):
    norm = abs(c0) ** 2 + abs(c1) ** 2
    if abs(norm - 1.0) > 1e-9:
        raise PreconditionError(f"qubit amplitudes are not normalized (|c0|^2+|c1|^2 = {norm:.12g})")
    return complex(c0), complex(c1)


def entangle(
    c0: complex,
    c1: complex,
    params: SystemParams,
    pulse: PulseSpec,
    dt: Optional[float] = None,
) -> EntangleResult:
    """Full-carrier entanglement pulse on (c0|0_q> + c1|1_q>)|0_a>.

    Fidelity is |<ideal|psi_I>|^2 with psi_I the final state in the
    interaction picture; the ideal is c0|0_q 0_a> + i c1|1b_q 1_a>, or the
    unconditional flip i(c0|0b_q 1_a> + c1|1b_q 1_a>) when omega_delta = 0.
    """
    c0, c1 = normalized_pair(c0, c1)
    s00, s10, s01, s11 = (s.amplitudes for s in model.dressed_states(params))
    initial = c0 * s00 + c1 * s10

    step = dt if dt is not None else max_step(params, pulse)
    trajectory = propagate(initial, params, pulse, step, pulse.duration, record_every=10**9)
    final = trajectory.states[-1]

    conditional = params.omega_delta > 0.0
    ideal = c0 * s00 + 1j * c1 * s11 if conditional else 1j * (c0 * s01 + c1 * s11)
    if not conditional:
        logger.info("omega_delta = 0: the pulse flips the ETLS unconditionally")

    final_i = to_interaction_picture(final, params, trajectory.times[-1])
    return EntangleResult(
        state=JointState(amplitudes=final),
        ideal=JointState(amplitudes=ideal),
        fidelity=ops.state_fidelity(ideal, final_i),
        etls_excitation=JointState(amplitudes=final).etls_excitation,
        conditional=conditional,
    )


def leakage_probability(rabi: float, detuning: float) -> float:
    """Off-resonant transition estimate (rabi/detuning)^2, both angular."""
    if detuning == 0.0:
        raise PreconditionError("leakage estimate needs a nonzero detuning")
    return float((rabi / detuning) ** 2)


def rabi_population(rabi: float, detuning: float, t):
    """Excited population of a driven two-level system (angular units)."""
    generalized = np.hypot(rabi, detuning)
    if generalized == 0.0:
        return np.zeros_like(np.asarray(t, dtype=float))
    return (rabi / generalized) ** 2 * np.sin(0.5 * generalized * np.asarray(t)) ** 2


def _su2_steps(ax, ay, az, h):
    """exp(-i h (ax sx + ay sy + az sz)) for broadcast coefficient arrays."""
    r = np.sqrt(ax**2 + ay**2 + az**2)
    c = np.cos(r * h)
    s = h * np.sinc(r * h / np.pi)  # sin(r h)/r
    u = np.empty(np.broadcast(ax, ay, az).shape + (2, 2), dtype=complex)
    u[..., 0, 0] = c - 1j * s * az
    u[..., 1, 1] = c + 1j * s * az
    u[..., 0, 1] = -1j * s * (ax - 1j * ay)
    u[..., 1, 0] = -1j * s * (ax + 1j * ay)
    return u


def rotating_frame_batch(
    initial: np.ndarray,
    rabi: float,
    noise: Optional[np.ndarray],
    dt: float,
    n_steps: int,
    drive_steps: Optional[int] = None,
    phase: float = np.pi,
    records: Optional[np.ndarray] = None,
    conditional: bool = True,
) -> np.ndarray:
    """Evolve a batch of rotating-frame states.

    initial has shape (4,) or (n_traj, 4); noise has shape (n_traj, >= n_steps)
    in GHz and is held constant over each step. The drive is on for the first
    drive_steps steps, on the qubit-|1> block only unless
    conditional is False. Returns states at the requested step counts with shape
    (n_traj, len(records), 4).
    """
    psi = np.atleast_2d(np.asarray(initial, dtype=complex))
    n_traj = psi.shape[0] if noise is None else noise.shape[0]
    psi = np.broadcast_to(psi, (n_traj, 4)).copy()
    drive_steps = n_steps if drive_steps is None else drive_steps
    records = np.array([n_steps]) if records is None else np.asarray(records, dtype=int)

    out = np.empty((n_traj, records.size, 4), dtype=complex)
    slot = 0
    while slot < records.size and records[slot] == 0:
        out[:, slot] = psi
        slot += 1

    half = 0.5 * rabi
    ax, ay = half * np.cos(phase), half * np.sin(phase)
    zeros = np.zeros(n_traj)
    for k in range(n_steps):
        az = zeros if noise is None else TWO_PI * noise[:, k]
        on = k < drive_steps
        driven = _su2_steps(ax if on else 0.0, ay if on else 0.0, az, dt)
        idle = np.exp(-1j * az * dt)
        # qubit-|1> block: indices (0, 1); qubit-|0> block: indices (2, 3)
        psi[:, 0:2] = np.einsum("tij,tj->ti", driven, psi[:, 0:2])
        if conditional:
            psi[:, 2] *= idle
            psi[:, 3] *= idle.conj()
        else:
            psi[:, 2:4] = np.einsum("tij,tj->ti", driven, psi[:, 2:4])
        while slot < records.size and records[slot] == k + 1:
            out[:, slot] = psi
            slot += 1
    return out


def rotating_frame_propagate(
    initial: Union[JointState, np.ndarray],
    rabi: float,
    noise: Optional[NoiseTrajectory],
    dt: float,
    T: float,
    drive_duration: Optional[float] = None,
    phase: float = np.pi,
    record_every: int = 1,
) -> Trajectory:
    """Evolve under (1 + sz_q)/4 Omega_X sx_a + f(t) sz_a (rotating frame)."""
    psi = as_joint_state(initial).amplitudes
    if rabi <= 0.0:
        raise PreconditionError(f"Rabi amplitude must be positive (got {rabi})")
    limit = 1.0 / (RESOLUTION_STEPS * rabi / TWO_PI)
    if noise is not None:
        if abs(noise.dt - dt) > 1e-12 * max(dt, 1.0):
            raise PreconditionError(f"noise step {noise.dt} ns differs from dt = {dt} ns")
    if dt > limit * (1.0 + 1e-9):
        raise PreconditionError(f"dt = {dt:.4g} ns does not resolve the Rabi period (need dt <= {limit:.4g} ns)")

    n_steps, h = _step_grid(dt, T)
    samples = None
    if noise is not None:
        if noise.samples.size < n_steps:
            raise PreconditionError(f"noise trajectory covers {noise.samples.size} steps, need {n_steps}")
        samples = noise.samples[None, :]
    drive_steps = n_steps if drive_duration is None else int(round(drive_duration / h))
    records = _record_indices(n_steps, record_every)

    states = rotating_frame_batch(psi, rabi, samples, h, n_steps, drive_steps, phase, records)[0]
    return Trajectory(times=records * h, states=states)
