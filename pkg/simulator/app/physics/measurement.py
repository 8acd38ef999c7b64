"""Projective ETLS readout and the switching-histogram statistics.

ETLS density matrices returned here are ordered (|0_a>, |1_a>).
"""

import logging
import math
from typing import Tuple, Union

import numpy as np

from app.errors import PreconditionError
from app.models.schemas import AccuracySpec, HistogramModel, JointState, ProjectionResult
from app.physics import dynamics
from app.utils import operators as ops

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-9
ETLS_EXCITED_PROJECTOR = ops.on_etls(np.outer(ops.ETLS_EXCITED, ops.ETLS_EXCITED.conj()))
ETLS_GROUND_PROJECTOR = ops.on_etls(np.outer(ops.ETLS_GROUND, ops.ETLS_GROUND.conj()))


def etls_density_matrix(c0: complex, c1: complex, overlap: float) -> np.ndarray:
    """rho_a = |c0|^2 |0_a><0_a| + |c1|^2 |1_a><1_a| + (i c0* c1 <0_q|1b_q> |1_a><0_a| + h.c.)."""
    c0, c1 = dynamics.normalized_pair(c0, c1)
    if abs(overlap) > 1.0:
        raise PreconditionError(f"overlap must satisfy |overlap| <= 1 (got {overlap})")
    coherence = 1j * np.conj(c0) * c1 * overlap
    return np.array(
        [[abs(c0) ** 2, np.conj(coherence)], [coherence, abs(c1) ** 2]],
        dtype=complex,
    )


def etls_matrix_from_joint(state) -> np.ndarray:
    """Partial trace over the qubit, reordered to (|0_a>, |1_a>)."""
    if isinstance(state, JointState):
        state = state.amplitudes
    return ops.trace_out_qubit(state)[::-1, ::-1]


def _joint_density(state: Union[JointState, np.ndarray]) -> np.ndarray:
    if isinstance(state, JointState):
        return state.density_matrix()
    rho = ops.as_density_matrix(state)
    if rho.shape != (4, 4):
        raise PreconditionError(f"expected a 4-vector or a 4x4 density matrix, got shape {rho.shape}")
    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > PROBABILITY_TOLERANCE:
        raise PreconditionError(f"input state is not normalized (trace = {trace:.12g})")
    return rho


def _excitation(rho: np.ndarray) -> float:
    return float(np.clip(np.real(np.trace(ETLS_EXCITED_PROJECTOR @ rho)), 0.0, 1.0))


def project_etls(state: Union[JointState, np.ndarray], seed: int) -> ProjectionResult:
    """Measure the ETLS; outcome 1 means |1_a>."""
    rho = _joint_density(state)
    p1 = _excitation(rho)
    rng = np.random.default_rng(seed)
    outcome = int(rng.random() < p1)

    projector = ETLS_EXCITED_PROJECTOR if outcome else ETLS_GROUND_PROJECTOR
    probability = p1 if outcome else 1.0 - p1
    collapsed = projector @ rho @ projector / probability
    return ProjectionResult(
        outcome=outcome,
        qubit_state=ops.trace_out_etls(collapsed),
        probability=probability,
        seed=seed,
    )


def sample_outcomes(state: Union[JointState, np.ndarray], shots: int, seed: int) -> np.ndarray:
    """Outcome of project_etls(state, seed + k) for k in range(shots)."""
    if shots < 1:
        raise PreconditionError(f"need at least one shot (got {shots})")
    p1 = _excitation(_joint_density(state))
    draws = np.array([np.random.default_rng(seed + k).random() for k in range(shots)])
    return (draws < p1).astype(int)


def detector_readout(outcomes: np.ndarray, model: HistogramModel, seed: int) -> np.ndarray:
    """Detector output per shot: y0 for outcome 0, y1 for outcome 1, plus Gaussian noise of variance sigma."""
    outcomes = np.asarray(outcomes)
    rng = np.random.default_rng(seed)
    means = np.where(outcomes == 0, model.y0, model.y1)
    return means + math.sqrt(model.sigma) * rng.standard_normal(outcomes.size)


def _ceil(x: float) -> int:
    # 1/(2*0.05)**2 evaluates to 100.00000000000001
    return int(math.ceil(round(x, 9)))


def required_repetitions_von_neumann(acc: AccuracySpec) -> int:
    return _ceil(1.0 / (2.0 * acc.a_m) ** 2)


def repetition_ratio(model: HistogramModel) -> float:
    """N_p / N_v = 4 sigma / |y1 - y0|^2."""
    return 4.0 * model.sigma / (model.y1 - model.y0) ** 2


def required_repetitions_overlapping(acc: AccuracySpec, model: HistogramModel) -> int:
    return _ceil(repetition_ratio(model) * required_repetitions_von_neumann(acc))


def sample_switching(model: HistogramModel, n: int, seed: int) -> np.ndarray:
    """Draws from weight N(y0, sigma) + (1 - weight) N(y1, sigma)."""
    if n < 1:
        raise PreconditionError(f"need at least one sample (got {n})")
    rng = np.random.default_rng(seed)
    branch_zero = rng.random(n) < model.weight
    means = np.where(branch_zero, model.y0, model.y1)
    return means + math.sqrt(model.sigma) * rng.standard_normal(n)


def mixture_moments(model: HistogramModel) -> Tuple[float, float]:
    """Mean and total variance of the switching mixture."""
    w = model.weight
    mean = w * model.y0 + (1.0 - w) * model.y1
    variance = model.sigma + w * (1.0 - w) * (model.y1 - model.y0) ** 2
    return mean, variance


def estimate_population(samples: np.ndarray, model: HistogramModel) -> float:
    """|c0|^2 inferred from the sample mean, clamped to [0, 1]."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise PreconditionError("cannot estimate a population from zero samples")
    estimate = (float(np.mean(samples)) - model.y1) / (model.y0 - model.y1)
    if not 0.0 <= estimate <= 1.0:
        logger.debug("population estimate %.4f clamped to [0, 1]", estimate)
    return float(np.clip(estimate, 0.0, 1.0))


def histogram_counts(samples: np.ndarray, bins: int = 50) -> Tuple[np.ndarray, np.ndarray]:
    """(edges, counts) of the switching histogram."""
    counts, edges = np.histogram(np.asarray(samples, dtype=float), bins=bins)
    return edges, counts
