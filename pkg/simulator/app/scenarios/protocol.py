import logging
import math
from typing import Tuple

import numpy as np

from app.models.config import RunConfig
from app.models.schemas import Report
from app.physics import dynamics, measurement, model, noise
from app.scenarios.router import ScenarioRouter

logger = logging.getLogger(__name__)

router = ScenarioRouter()


def seed_blocks(seed: int, n_traj: int, shots: int) -> Tuple[int, int, int]:
    """Base seeds of the noise trajectories, the projective shots and the detector readout.

    Trajectories take seed .. seed + n_traj - 1 and the shots take the next
    `shots` values, so no generator is seeded twice within one run.
    """
    return seed, seed + n_traj, seed + n_traj + shots


@router.scenario("protocol")
def run_protocol(config: RunConfig) -> Report:
    """Entangle under noise, project the ETLS, read out and estimate |c0|^2."""
    params = config.qubit.to_params()
    spectrum = model.dressed_spectrum(params)
    noise_model = config.noise.to_model()
    shots = config.protocol.shots
    noise_seed, shot_seed, readout_seed = seed_blocks(config.run.seed, config.run.n_traj, shots)

    c0_sq = config.protocol.c0_sq
    c0, c1 = math.sqrt(c0_sq), math.sqrt(1.0 - c0_sq)
    pulse = dynamics.pi_pulse(params, "q1", config.pulse.rabi)

    clean = dynamics.entangle(c0, c1, params, pulse, dt=config.run.dt_ns)
    ensemble = noise.dephasing_ensemble(c0, c1, params, pulse, noise_model, config.run.n_traj, noise_seed)

    u = dynamics.rotating_basis(params)
    rho = u @ ensemble.density_matrix @ u.conj().T
    outcomes = measurement.sample_outcomes(rho, shots, shot_seed)
    readout = config.readout.to_model(weight=c0_sq)
    signal = measurement.detector_readout(outcomes, readout, readout_seed)
    estimate = measurement.estimate_population(signal, readout)

    excitation = float(np.real(rho[0, 0] + rho[2, 2]))
    branch_gap = 2.0 * np.pi * (spectrum.f_cond_q1 - spectrum.f_cond_q0)
    logger.info("|c0|^2 = %.4f estimated as %.4f from %d shots", c0_sq, estimate, shots)

    return Report(
        scenario="protocol",
        scalars={
            "c0_sq_true": c0_sq,
            "c0_sq_estimate": estimate,
            "estimate_error": estimate - c0_sq,
            "binomial_error": math.sqrt(c0_sq * (1.0 - c0_sq) / shots),
            "shots": shots,
            "n_traj": ensemble.n_traj,
            "etls_excitation": excitation,
            "entangle_fidelity": clean.fidelity,
            "ensemble_fidelity": ensemble.fidelity,
            "ensemble_purity": ensemble.purity,
            "conditional": clean.conditional,
            "leakage_estimate": dynamics.leakage_probability(pulse.rabi, branch_gap) if branch_gap else None,
        },
        table={"shot": np.arange(shots), "outcome": outcomes, "detector_output": signal},
    )
