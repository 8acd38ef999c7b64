"""Coupled qubit-ETLS Hamiltonian and its closed-form spectrum.

H0 = eps0/2 sz_q + t0/2 sx_q + omega_a/2 sz_a + t0a/2 sx_a + omega_delta/2 sz_q sz_a

All quantities are linear frequencies in GHz.
"""

import itertools
import logging
from typing import List, Tuple

import numpy as np

from app.errors import PreconditionError
from app.models.schemas import DressedSpectrum, JointState, SystemParams, TransitionLine
from app.utils import operators as ops

logger = logging.getLogger(__name__)

LEVEL_LABELS = ("0q_0a", "1q_0a", "0bq_1a", "1bq_1a")


def build_hamiltonian(params: SystemParams) -> np.ndarray:
    return (
        0.5 * params.epsilon0 * ops.SZ_Q
        + 0.5 * params.t0 * ops.SX_Q
        + 0.5 * params.omega_a * ops.SZ_A
        + 0.5 * params.t0a * ops.SX_A
        + 0.5 * params.omega_delta * ops.SZ_SZ
    )


def _require_storage(params: SystemParams) -> None:
    if params.t0a != 0.0:
        logger.warning("dressed labels requested with t0a = %g", params.t0a)
        raise PreconditionError(
            f"dressed labels are undefined under ETLS tunneling (t0a = {params.t0a})"
        )


def _mixing_angle(bias: float, t0: float) -> float:
    # sin(theta) = t0 / omega with theta in [0, pi]; cos(theta) carries the sign of the bias.
    # t0 = 0 with a negative bias gives theta = pi, which keeps |0_q> = -|up_q> the lower level.
    return float(np.arctan2(t0, bias))


def dressed_spectrum(params: SystemParams) -> DressedSpectrum:
    _require_storage(params)

    bias = params.epsilon0 - params.omega_delta
    bias_bar = params.epsilon0 + params.omega_delta
    omega_q = float(np.hypot(bias, params.t0))
    omega_q_bar = float(np.hypot(bias_bar, params.t0))
    half_a = 0.5 * params.omega_a
    shift = 0.5 * (omega_q_bar - omega_q)

    return DressedSpectrum(
        omega_q=omega_q,
        omega_q_bar=omega_q_bar,
        theta=_mixing_angle(bias, params.t0),
        theta_bar=_mixing_angle(bias_bar, params.t0),
        e_0q_0a=-half_a - 0.5 * omega_q,
        e_1q_0a=-half_a + 0.5 * omega_q,
        e_0bq_1a=half_a - 0.5 * omega_q_bar,
        e_1bq_1a=half_a + 0.5 * omega_q_bar,
        f_cond_q0=params.omega_a - shift,
        f_cond_q1=params.omega_a + shift,
    )


def qubit_vectors(theta: float) -> Tuple[np.ndarray, np.ndarray]:
    """(|0_q>, |1_q>) in the (up_q, down_q) basis for mixing angle theta."""
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    return np.array([-s, c], dtype=complex), np.array([c, s], dtype=complex)


def dressed_states(params: SystemParams) -> Tuple[JointState, JointState, JointState, JointState]:
    """(|0_q 0_a>, |1_q 0_a>, |0b_q 1_a>, |1b_q 1_a>)."""
    spectrum = dressed_spectrum(params)
    q0, q1 = qubit_vectors(spectrum.theta)
    q0_bar, q1_bar = qubit_vectors(spectrum.theta_bar)
    return (
        JointState(amplitudes=ops.product_state(q0, ops.ETLS_GROUND)),
        JointState(amplitudes=ops.product_state(q1, ops.ETLS_GROUND)),
        JointState(amplitudes=ops.product_state(q0_bar, ops.ETLS_EXCITED)),
        JointState(amplitudes=ops.product_state(q1_bar, ops.ETLS_EXCITED)),
    )


def dressed_basis(params: SystemParams) -> np.ndarray:
    """Unitary whose columns are the dressed states in LEVEL_LABELS order."""
    return np.column_stack([s.amplitudes for s in dressed_states(params)])


def qubit_overlap(spectrum: DressedSpectrum) -> float:
    """<0_q|1b_q> = sin((theta_bar - theta)/2)."""
    return float(np.sin(0.5 * (spectrum.theta_bar - spectrum.theta)))


def qubit_frequency(params: SystemParams) -> float:
    """Single-qubit gate frequency with the ETLS stored in |0_a>."""
    return dressed_spectrum(params).omega_q


def transition_table(params: SystemParams) -> List[TransitionLine]:
    spectrum = dressed_spectrum(params)
    energies = spectrum.levels
    states = dict(zip(LEVEL_LABELS, dressed_states(params)))

    lines = []
    for a, b in itertools.combinations(LEVEL_LABELS, 2):
        lower, upper = (a, b) if energies[a] <= energies[b] else (b, a)
        element = np.vdot(states[upper].amplitudes, ops.SX_A @ states[lower].amplitudes)
        lines.append(
            TransitionLine(
                lower=lower,
                upper=upper,
                frequency=energies[upper] - energies[lower],
                drive_element=float(abs(element)),
            )
        )
    return sorted(lines, key=lambda line: line.frequency)
