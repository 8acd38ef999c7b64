"""rf-SQUID supplementary system.

The loop is quantized in the phase basis,

    H = 4 E_C (-d^2/dphi^2) + E_L (phi - 2 pi f_rf)^2 / 2 - E_J cos(phi),

discretized with a central second difference on a uniform grid and solved as
a symmetric tridiagonal eigenproblem. All energies are in GHz.
"""

import itertools
import logging
import math
from typing import Optional

import numpy as np
from scipy import constants
from scipy.linalg import eigh_tridiagonal

from app.errors import ConvergenceError, LocalizationError, PreconditionError
from app.models.schemas import DerivedEnergies, EigenSolution, EtlsCharacterization, PriorSchemeParams, SquidParams

logger = logging.getLogger(__name__)

FLUX_QUANTUM = constants.physical_constants["mag. flux quantum"][0]
DEFAULT_GRID_POINTS = 8001
GRID_HALF_WIDTH = 1.5 * np.pi
MIN_GRID_POINTS = 1000
DEFAULT_LEVELS = 24
CONVERGENCE_TOLERANCE = 0.1  # GHz
LOCALIZATION_THRESHOLD = 0.9
DEGENERACY_TOLERANCE = 1e-3  # GHz
ISOLATION_TARGET = 40.0  # GHz
FLUX_TARGET = (0.2, 0.4)  # Phi0


def _si(params: SquidParams):
    return params.l_ph * 1e-12, params.ic_ua * 1e-6, params.cj_ff * 1e-15


def derived_energies(params: SquidParams) -> DerivedEnergies:
    inductance, current, capacitance = _si(params)
    to_ghz = 1.0 / (constants.h * 1e9)
    reduced_flux = FLUX_QUANTUM / (2.0 * np.pi)
    return DerivedEnergies(
        e_j=current * reduced_flux * to_ghz,
        e_c=constants.e**2 / (2.0 * capacitance) * to_ghz,
        e_l=reduced_flux**2 / inductance * to_ghz,
        beta_l=2.0 * np.pi * inductance * current / FLUX_QUANTUM,
    )


def plasma_frequency(params: SquidParams) -> float:
    """LC oscillator frequency 1/(2 pi sqrt(L C)) in GHz."""
    inductance, _, capacitance = _si(params)
    return 1.0 / (2.0 * np.pi * math.sqrt(inductance * capacitance)) / 1e9


def external_phase(params: SquidParams) -> float:
    return 2.0 * np.pi * params.f_rf


def default_grid(params: SquidParams, n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    center = external_phase(params)
    return np.linspace(center - GRID_HALF_WIDTH, center + GRID_HALF_WIDTH, n_points)


def potential(params: SquidParams, grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    center = external_phase(params)
    if grid.size < MIN_GRID_POINTS:
        raise PreconditionError(f"grid has {grid.size} points, need at least {MIN_GRID_POINTS}")
    if grid[0] > center - np.pi + 1e-9 or grid[-1] < center + np.pi - 1e-9:
        raise PreconditionError(
            f"grid [{grid[0]:.4f}, {grid[-1]:.4f}] does not cover both wells around {center:.4f} +/- pi"
        )
    energies = derived_energies(params)
    return 0.5 * energies.e_l * (grid - center) ** 2 - energies.e_j * np.cos(grid)


def local_minima(values: np.ndarray) -> np.ndarray:
    """Interior indices where the discrete gradient changes sign from - to +."""
    slope = np.diff(values)
    return np.flatnonzero((slope[:-1] < 0.0) & (slope[1:] >= 0.0)) + 1


def local_maxima(values: np.ndarray) -> np.ndarray:
    slope = np.diff(values)
    return np.flatnonzero((slope[:-1] > 0.0) & (slope[1:] <= 0.0)) + 1


def _diagonalize(params: SquidParams, grid: np.ndarray, n_levels: int):
    h = float(grid[1] - grid[0])
    e_c = derived_energies(params).e_c
    kinetic = 4.0 * e_c / h**2
    diag = 2.0 * kinetic + potential(params, grid)
    off = np.full(grid.size - 1, -kinetic)
    energies, vectors = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    # unit norm under the grid measure, largest lobe positive
    vectors = vectors / math.sqrt(h)
    peaks = vectors[np.argmax(np.abs(vectors), axis=0), np.arange(vectors.shape[1])]
    return energies, vectors * np.sign(peaks)


def solve_spectrum(
    params: SquidParams,
    grid: Optional[np.ndarray] = None,
    n_levels: int = DEFAULT_LEVELS,
    check_convergence: bool = True,
) -> EigenSolution:
    grid = default_grid(params) if grid is None else np.asarray(grid, dtype=float)
    if n_levels < 1 or n_levels > grid.size:
        raise PreconditionError(f"cannot compute {n_levels} levels on {grid.size} grid points")

    energies, vectors = _diagonalize(params, grid, n_levels)
    logger.debug("rf-SQUID spectrum: %d levels on %d points, E0 = %.6g GHz", n_levels, grid.size, energies[0])

    if check_convergence:
        fine = np.linspace(grid[0], grid[-1], 2 * grid.size - 1)
        fine_energies, _ = _diagonalize(params, fine, n_levels)
        shift = float(np.max(np.abs(fine_energies - energies)))
        logger.debug("grid halving shifts the levels by at most %.3g GHz", shift)
        if shift >= CONVERGENCE_TOLERANCE:
            raise ConvergenceError(
                f"grid halving moved the levels by {shift:.3g} GHz (tolerance {CONVERGENCE_TOLERANCE} GHz)",
                coarse=energies,
                fine=fine_energies,
            )

    return EigenSolution(grid=grid, energies=energies, wavefunctions=vectors)


def sign_changes(wavefunction: np.ndarray, floor: float = 1e-6) -> int:
    """Nodes of a grid function, ignoring tails below floor * max|psi|."""
    significant = wavefunction[np.abs(wavefunction) > floor * np.max(np.abs(wavefunction))]
    return int(np.count_nonzero(np.diff(np.sign(significant)) != 0))


def _localize_degenerate(solution: EigenSolution) -> np.ndarray:
    """Within clusters of (numerically) degenerate levels, rotate to the
    basis that diagonalizes phi, so each member sits in a single well."""
    psi = solution.wavefunctions.copy()
    h = solution.spacing
    energies = solution.energies
    start = 0
    for k in range(1, energies.size + 1):
        if k < energies.size and energies[k] - energies[k - 1] < DEGENERACY_TOLERANCE:
            continue
        if k - start > 1:
            block = psi[:, start:k]
            position = block.T @ (solution.grid[:, None] * block) * h
            _, rotation = np.linalg.eigh(position)
            psi[:, start:k] = block @ rotation
        start = k
    return psi


def characterize_etls(solution: EigenSolution, params: SquidParams) -> EtlsCharacterization:
    """Most isolated pair of localized levels in opposite wells.

    The pair is chosen on isolation alone; the flux window is reported through
    meets_flux_target and does not steer the choice.
    """
    grid = solution.grid
    h = solution.spacing
    center = external_phase(params)
    u = potential(params, grid)

    minima = local_minima(u)
    if minima.size < 2:
        raise LocalizationError(f"potential has {minima.size} well(s); an opposite-well pair needs two")
    deepest = np.sort(minima[np.argsort(u[minima])[:2]])
    between = [m for m in local_maxima(u) if deepest[0] < m < deepest[1]]
    barrier = max(between, key=lambda m: u[m])

    psi = _localize_degenerate(solution)
    density = psi**2 * h
    mean_phase = density.T @ grid
    left_weight = density[: barrier + 1].sum(axis=0)
    localized = np.maximum(left_weight, 1.0 - left_weight) >= LOCALIZATION_THRESHOLD
    side = np.sign(mean_phase - center)

    inductance, _, _ = _si(params)
    currents = (FLUX_QUANTUM / (2.0 * np.pi)) * (mean_phase - center) / inductance * 1e6  # uA

    energies = solution.energies
    candidates = [k for k in range(energies.size - 1) if localized[k]]
    best = None
    for i, j in itertools.combinations(candidates, 2):
        if side[i] * side[j] >= 0:
            continue
        others = np.delete(energies, [i, j])
        isolation = float(min(np.min(np.abs(others - energies[i])), np.min(np.abs(others - energies[j]))))
        if best is None or isolation > best[0]:
            best = (isolation, i, j)

    if best is None:
        occupancy = ", ".join(
            f"{k}:{'L' if side[k] < 0 else 'R'}{'' if localized[k] else '?'}" for k in range(energies.size)
        )
        raise LocalizationError(f"no localized opposite-well pair among the computed levels ({occupancy})")

    isolation, i, j = best
    delta_i = abs(currents[j] - currents[i])
    delta_phi = delta_i * 1e-6 * inductance / FLUX_QUANTUM
    logger.debug("ETLS pair (%d, %d): dPhi = %.4f Phi0, isolation %.2f GHz", i, j, delta_phi, isolation)
    if not FLUX_TARGET[0] <= delta_phi <= FLUX_TARGET[1]:
        logger.info("ETLS flux difference %.3f Phi0 lies outside [%g, %g] Phi0", delta_phi, *FLUX_TARGET)
    return EtlsCharacterization(
        indices=(int(i), int(j)),
        energies=(float(energies[i]), float(energies[j])),
        currents=(float(currents[i]), float(currents[j])),
        delta_i=float(delta_i),
        delta_phi=float(delta_phi),
        isolation=isolation,
        meets_isolation_target=isolation >= ISOLATION_TARGET,
        meets_flux_target=bool(FLUX_TARGET[0] <= delta_phi <= FLUX_TARGET[1]),
    )


def displaced_ground_overlap(delta_phi0: float, var_phi: float) -> float:
    """<psi_g^-|psi_g^+> for oscillator ground states displaced by +/- delta_phi0."""
    if var_phi <= 0.0:
        raise PreconditionError(f"ground-state phase variance must be positive (got {var_phi})")
    return float(math.exp(-(delta_phi0**2) / (2.0 * var_phi)))


def prior_scheme_displacement(prior: PriorSchemeParams) -> float:
    """delta_phi0 = pi M_q I_cir / Phi0."""
    return float(np.pi * prior.m_q_ph * 1e-12 * prior.i_cir_na * 1e-9 / FLUX_QUANTUM)


def qubit_self_flux(prior: PriorSchemeParams) -> float:
    """Self-induced qubit flux L_q I_cir in units of Phi0."""
    return float(prior.l_q_ph * 1e-12 * prior.i_cir_na * 1e-9 / FLUX_QUANTUM)


def state_distinguishability(overlap: float) -> float:
    """Trace distance between two pure detector states with the given overlap."""
    return float(math.sqrt(max(0.0, 1.0 - overlap**2)))
