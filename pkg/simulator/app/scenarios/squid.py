import logging

import numpy as np

from app.models.config import RunConfig
from app.models.schemas import Report
from app.physics import squid
from app.scenarios.router import ScenarioRouter

logger = logging.getLogger(__name__)

router = ScenarioRouter()


@router.scenario("squid")
def run_squid(config: RunConfig) -> Report:
    """rf-SQUID potential, levels, ETLS pair and the prior-scheme comparison."""
    params = config.squid.to_params()
    prior = config.prior.to_params()
    energies = squid.derived_energies(params)

    grid = squid.default_grid(params, config.run.grid_points)
    solution = squid.solve_spectrum(params, grid, config.run.n_levels)
    etls = squid.characterize_etls(solution, params)
    i, j = etls.indices
    logger.info(
        "ETLS levels %d/%d: dI = %.3f uA, dPhi = %.3f Phi0, isolation %.1f GHz",
        i,
        j,
        etls.delta_i,
        etls.delta_phi,
        etls.isolation,
    )

    displacement = squid.prior_scheme_displacement(prior)
    prior_overlap = squid.displaced_ground_overlap(displacement, prior.phi_m_rms**2)
    etls_overlap = float(abs(np.sum(solution.wavefunctions[:, i] * solution.wavefunctions[:, j]) * solution.spacing))
    self_flux = squid.qubit_self_flux(prior)

    scalars = {f"{name}_ghz" if name != "beta_l" else name: value for name, value in energies.model_dump().items()}
    scalars.update(
        ej_over_ec=energies.e_j / energies.e_c if energies.e_c else None,
        plasma_frequency_ghz=squid.plasma_frequency(params),
        etls_lower=i,
        etls_upper=j,
        etls_energy_lower_ghz=etls.energies[0],
        etls_energy_upper_ghz=etls.energies[1],
        current_lower_ua=etls.currents[0],
        current_upper_ua=etls.currents[1],
        delta_i_ua=etls.delta_i,
        delta_i_over_ic=etls.delta_i / params.ic_ua if params.ic_ua else None,
        delta_phi=etls.delta_phi,
        isolation_ghz=etls.isolation,
        meets_isolation_target=etls.meets_isolation_target,
        meets_flux_target=etls.meets_flux_target,
        prior_displacement=displacement,
        prior_overlap=prior_overlap,
        prior_distinguishability=squid.state_distinguishability(prior_overlap),
        etls_distinguishability=squid.state_distinguishability(etls_overlap),
        qubit_self_flux=self_flux,
        signal_gain=etls.delta_phi / self_flux,
    )

    return Report(
        scenario="squid",
        scalars=scalars,
        table={
            "phi": solution.grid,
            "potential_ghz": squid.potential(params, solution.grid),
            "psi_lower": solution.wavefunctions[:, i],
            "psi_upper": solution.wavefunctions[:, j],
        },
        series={"energies_ghz": solution.energies},
    )
