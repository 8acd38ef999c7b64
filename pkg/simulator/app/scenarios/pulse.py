import logging

import numpy as np

from app.models.config import RunConfig
from app.models.schemas import Report
from app.physics import dynamics, model
from app.scenarios.router import ScenarioRouter

logger = logging.getLogger(__name__)

router = ScenarioRouter()


@router.scenario("pulse")
def run_pulse(config: RunConfig) -> Report:
    """Full-carrier Rabi trajectory of the conditional pi pulse."""
    params = config.qubit.to_params()
    spectrum = model.dressed_spectrum(params)
    pulse = dynamics.pi_pulse(params, config.pulse.target, config.pulse.rabi)
    dt = config.run.dt_ns or dynamics.max_step(params, pulse)
    T = config.run.t_ns or pulse.duration

    states = model.dressed_states(params)
    start = states[1] if config.pulse.initial_qubit == 1 else states[0]
    other = states[0] if config.pulse.initial_qubit == 1 else states[1]
    trajectory = dynamics.propagate(start, params, pulse, dt, T, record_every=config.run.record_every)
    spectator = dynamics.propagate(other, params, pulse, dt, T, record_every=10**9)

    dressed = np.abs(trajectory.states @ model.dressed_basis(params).conj()) ** 2
    branch_gap = 2.0 * np.pi * (spectrum.f_cond_q1 - spectrum.f_cond_q0)
    resonant_branch = 1 if config.pulse.target == "q1" else 0
    detuning = 0.0 if config.pulse.initial_qubit == resonant_branch else branch_gap
    oracle = dynamics.rabi_population(pulse.rabi, detuning, trajectory.times)

    final = float(trajectory.etls_excitation[-1])
    logger.info(
        "pulse on |%d_q>: ETLS excitation %.6f, spectator branch %.3e",
        config.pulse.initial_qubit,
        final,
        spectator.final.etls_excitation,
    )

    table = {"time_ns": trajectory.times, "etls_excitation": trajectory.etls_excitation, "rwa_oracle": oracle}
    table.update({f"p_{label}": dressed[:, k] for k, label in enumerate(model.LEVEL_LABELS)})
    return Report(
        scenario="pulse",
        scalars={
            "carrier_ghz": pulse.carrier,
            "rabi_rad_per_ns": pulse.rabi,
            "duration_ns": pulse.duration,
            "t_ns": float(trajectory.times[-1]),
            "dt_ns": dt,
            "initial_qubit": config.pulse.initial_qubit,
            "final_etls_excitation": final,
            "spectator_etls_excitation": spectator.final.etls_excitation,
            "leakage_estimate": dynamics.leakage_probability(pulse.rabi, branch_gap) if branch_gap else None,
        },
        table=table,
    )
