import logging

from app.models.config import RunConfig
from app.models.schemas import Report
from app.physics import model
from app.scenarios.router import ScenarioRouter

logger = logging.getLogger(__name__)

router = ScenarioRouter()


@router.scenario("spectrum")
def run_spectrum(config: RunConfig) -> Report:
    """Dressed spectrum, conditional frequencies and transition table."""
    params = config.qubit.to_params()
    spectrum = model.dressed_spectrum(params)
    lines = model.transition_table(params)
    logger.info(
        "conditional ETLS lines: %.4f GHz (q0), %.4f GHz (q1)", spectrum.f_cond_q0, spectrum.f_cond_q1
    )

    scalars = spectrum.model_dump()
    scalars.update(
        overlap=model.qubit_overlap(spectrum),
        qubit_frequency=model.qubit_frequency(params),
        conditional=params.omega_delta > 0.0,
    )
    return Report(
        scenario="spectrum",
        scalars=scalars,
        table={
            "lower": [line.lower for line in lines],
            "upper": [line.upper for line in lines],
            "frequency_ghz": [line.frequency for line in lines],
            "drive_element": [line.drive_element for line in lines],
        },
    )
