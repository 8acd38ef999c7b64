import logging

import numpy as np

from app.models.config import RunConfig
from app.models.schemas import Report
from app.physics import measurement
from app.scenarios.router import ScenarioRouter

logger = logging.getLogger(__name__)

router = ScenarioRouter()


@router.scenario("histogram")
def run_histogram(config: RunConfig) -> Report:
    """Overlapping switching histograms and the repetition counts they imply."""
    section = config.histogram
    model_ = section.to_model()
    accuracy = section.to_accuracy()
    seed = config.run.seed

    n_v = measurement.required_repetitions_von_neumann(accuracy)
    n_p = measurement.required_repetitions_overlapping(accuracy, model_)
    n = section.samples or n_p

    samples = measurement.sample_switching(model_, n, seed)
    edges, counts = measurement.histogram_counts(samples, section.bins)
    # batch k of the Monte Carlo uses seed + 1 + k so it never reuses the dumped batch
    estimates = np.array(
        [measurement.estimate_population(measurement.sample_switching(model_, n, seed + 1 + k), model_) for k in range(section.trials)]
    )
    mean, variance = measurement.mixture_moments(model_)
    logger.info("N_v = %d, N_p = %d; estimator spread %.4f at N = %d", n_v, n_p, estimates.std(), n)

    return Report(
        scenario="histogram",
        scalars={
            "separation_ratio": model_.separation_ratio,
            "repetition_ratio": measurement.repetition_ratio(model_),
            "n_von_neumann": n_v,
            "n_overlapping": n_p,
            "samples": n,
            "weight": model_.weight,
            "estimate": measurement.estimate_population(samples, model_),
            "sample_mean": float(samples.mean()),
            "mixture_mean": mean,
            "mixture_variance": variance,
            "trials": section.trials,
            "estimate_std": float(estimates.std()),
            "accuracy": accuracy.a_m,
        },
        table={"bin_left": edges[:-1], "bin_right": edges[1:], "count": counts},
    )
