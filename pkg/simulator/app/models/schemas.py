"""Domain types shared by the physics modules and the scenario handlers.

Energies of the coupled qubit-ETLS system are linear frequencies in GHz
(h = 1). Rabi amplitudes are angular (rad/ns); the conversion happens once,
at the configuration boundary.
"""

from typing import Dict, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

NORM_TOLERANCE = 1e-9
TRAJECTORY_NORM_TOLERANCE = 1e-8


class SystemParams(BaseModel):
    """The five energy scales of the coupled Hamiltonian, in GHz."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    epsilon0: float
    t0: float = Field(ge=0.0)
    omega_a: float = Field(gt=0.0)
    t0a: float = 0.0
    omega_delta: float = Field(ge=0.0)


class JointState(BaseModel):
    """Pure state in the basis (|up_q up_a>, |up_q dn_a>, |dn_q up_a>, |dn_q dn_a>).

    |0_a> is the sigma_z^a = -1 state, so index 1 and 3 hold the ETLS ground side.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _as_vector(cls, v):
        arr = np.asarray(v, dtype=complex).reshape(-1)
        if arr.shape != (4,):
            raise ValueError(f"joint state needs 4 amplitudes, got {arr.shape[0]}")
        return arr

    @field_validator("amplitudes")
    @classmethod
    def _normalized(cls, v):
        norm = float(np.vdot(v, v).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"joint state is not normalized (|psi|^2 = {norm:.12g})")
        return v

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def etls_excitation(self) -> float:
        """Population of |1_a> (sigma_z^a = +1)."""
        p = self.populations
        return float(p[0] + p[2])

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


class DressedSpectrum(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega_q: float
    omega_q_bar: float
    theta: float
    theta_bar: float
    e_0q_0a: float
    e_1q_0a: float
    e_0bq_1a: float
    e_1bq_1a: float
    f_cond_q0: float
    f_cond_q1: float

    @property
    def levels(self) -> dict:
        return {
            "0q_0a": self.e_0q_0a,
            "1q_0a": self.e_1q_0a,
            "0bq_1a": self.e_0bq_1a,
            "1bq_1a": self.e_1bq_1a,
        }


class TransitionLine(BaseModel):
    model_config = ConfigDict(frozen=True)

    lower: str
    upper: str
    frequency: float
    drive_element: float


class PulseSpec(BaseModel):
    """Drive Omega_X cos(2 pi carrier t + phase) on sigma_x of the chosen axis.

    carrier is a linear frequency (GHz), rabi is angular (rad/ns), so a
    resonant rectangular pulse inverts a two-level system at duration = pi/rabi.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    carrier: float = Field(ge=0.0)
    rabi: float = Field(gt=0.0)
    duration: float = Field(gt=0.0)
    phase: float = 0.0
    envelope: Literal["rectangular"] = "rectangular"
    axis: Literal["etls", "qubit"] = "etls"

    def is_active(self, t: np.ndarray) -> np.ndarray:
        return (np.asarray(t) >= 0.0) & (np.asarray(t) < self.duration)


class Trajectory(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    states: np.ndarray

    @model_validator(mode="after")
    def _check(self):
        if self.states.ndim != 2 or self.states.shape != (self.times.size, 4):
            raise ValueError("states must have shape (len(times), 4)")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        norms = np.sum(np.abs(self.states) ** 2, axis=1)
        drift = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
        if drift > TRAJECTORY_NORM_TOLERANCE:
            raise ValueError(f"trajectory norm drifted by {drift:.3e}")
        return self

    @property
    def final(self) -> JointState:
        return JointState(amplitudes=self.states[-1])

    @property
    def etls_excitation(self) -> np.ndarray:
        p = np.abs(self.states) ** 2
        return p[:, 0] + p[:, 2]


class EntangleResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    state: JointState
    ideal: JointState
    fidelity: float
    etls_excitation: float
    conditional: bool


class NoiseModel(BaseModel):
    """Stationary Ornstein-Uhlenbeck flux noise f(t), coupled as f(t) sigma_z^a."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    sigma_f: float = Field(ge=0.0)
    tau_c: float = Field(gt=0.0)
    kind: Literal["ornstein_uhlenbeck"] = "ornstein_uhlenbeck"


class NoiseTrajectory(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dt: float
    samples: np.ndarray
    seed: int

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.dt


class EnsembleResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    density_matrix: np.ndarray
    fidelity: float
    purity: float
    n_traj: int


class T2Estimate(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t2: float
    lower_bound: bool
    probe_window: float
    times: np.ndarray
    coherence: np.ndarray
    analytic_rate: float
    spectral_density_zero: float
    spectral_density_rabi: float


class SquidParams(BaseModel):
    """rf-SQUID circuit: loop inductance (pH), critical current (uA),
    junction capacitance (fF) and flux bias in units of the flux quantum."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    l_ph: float = Field(gt=0.0)
    ic_ua: float = Field(ge=0.0)
    cj_ff: float = Field(gt=0.0)
    f_rf: float = Field(gt=0.0)


class DerivedEnergies(BaseModel):
    model_config = ConfigDict(frozen=True)

    e_j: float
    e_c: float
    e_l: float
    beta_l: float


class EigenSolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: np.ndarray
    energies: np.ndarray
    wavefunctions: np.ndarray

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])


class EtlsCharacterization(BaseModel):
    model_config = ConfigDict(frozen=True)

    indices: Tuple[int, int]
    energies: Tuple[float, float]
    currents: Tuple[float, float]
    delta_i: float
    delta_phi: float
    isolation: float
    meets_isolation_target: bool
    meets_flux_target: bool


class PriorSchemeParams(BaseModel):
    """dc-SQUID readout of the earlier experiment: mutual inductance (pH),
    qubit circulating current (nA), qubit loop inductance (pH) and the rms
    phase width of the detector ground state."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    m_q_ph: float = Field(default=8.0, gt=0.0)
    i_cir_na: float = Field(default=140.0, gt=0.0)
    l_q_ph: float = Field(default=10.0, gt=0.0)
    phi_m_rms: float = Field(default=0.1, gt=0.0)


class HistogramModel(BaseModel):
    """Two-Gaussian detector phenomenology. sigma is a variance."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    y0: float
    y1: float
    sigma: float = Field(gt=0.0)
    weight: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _distinct_means(self):
        if self.y0 == self.y1:
            raise ValueError("y0 and y1 must differ")
        return self

    @property
    def separation_ratio(self) -> float:
        """2 sqrt(sigma) / |y1 - y0|."""
        return 2.0 * np.sqrt(self.sigma) / abs(self.y1 - self.y0)


class AccuracySpec(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    a_m: float = Field(gt=0.0, lt=1.0)


class ProjectionResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    outcome: int
    qubit_state: np.ndarray
    probability: float
    seed: Optional[int] = None


Scalar = Union[bool, int, float, str, None]


class Report(BaseModel):
    """What a scenario hands back to the CLI.

    scalars go into the JSON object and the CSV preamble; table columns share
    one length and become CSV rows; series are extra arrays (JSON only).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    scenario: str
    scalars: Dict[str, Scalar] = Field(default_factory=dict)
    table: Dict[str, np.ndarray] = Field(default_factory=dict)
    series: Dict[str, np.ndarray] = Field(default_factory=dict)

    @field_validator("scalars", mode="before")
    @classmethod
    def _plain_scalars(cls, v):
        return {name: value.item() if isinstance(value, np.generic) else value for name, value in v.items()}

    @field_validator("table", "series", mode="before")
    @classmethod
    def _as_arrays(cls, v):
        return {name: np.asarray(column) for name, column in v.items()}

    @field_validator("table")
    @classmethod
    def _equal_lengths(cls, v):
        lengths = {name: column.shape[0] for name, column in v.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"table columns differ in length: {lengths}")
        return v
