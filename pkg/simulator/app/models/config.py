"""Run configuration.

A config file is flat ``section.key = value`` text read with python-dotenv
(interpolation off, the process environment is never consulted). Dotted keys
are folded into one pydantic model per section. Missing keys keep the
defaults below, which reproduce the reference parameter set.
"""

import logging
from pathlib import Path
from typing import Dict, Literal, Mapping, Optional, Union

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.errors import ConfigError
from app.models.schemas import (
    AccuracySpec,
    HistogramModel,
    NoiseModel,
    PriorSchemeParams,
    SquidParams,
    SystemParams,
)

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class QubitSection(_Section):
    epsilon0_ghz: float = 13.0
    t0_ghz: float = 1.0
    omega_a_ghz: float = 11.0
    t0a_ghz: float = 0.0
    omega_delta_ghz: float = 3.0

    def to_params(self) -> SystemParams:
        return SystemParams(
            epsilon0=self.epsilon0_ghz,
            t0=self.t0_ghz,
            omega_a=self.omega_a_ghz,
            t0a=self.t0a_ghz,
            omega_delta=self.omega_delta_ghz,
        )


class PulseSection(_Section):
    rabi_mhz: float = Field(default=50.0, gt=0.0)
    target: Literal["q1", "q0"] = "q1"
    initial_qubit: int = Field(default=1, ge=0, le=1)

    @property
    def rabi(self) -> float:
        """Angular Rabi amplitude in rad/ns."""
        return 2.0 * np.pi * self.rabi_mhz * 1e-3


class NoiseSection(_Section):
    sigma_f_ghz: float = Field(default=0.0008, ge=0.0)
    tau_c_ns: float = Field(default=10.0, gt=0.0)
    temperature_mk: float = Field(default=20.0, ge=0.0)

    def to_model(self) -> NoiseModel:
        return NoiseModel(sigma_f=self.sigma_f_ghz, tau_c=self.tau_c_ns)


class SquidSection(_Section):
    l_ph: float = Field(default=154.0, gt=0.0)
    ic_ua: float = Field(default=4.0, ge=0.0)
    cj_ff: float = Field(default=40.0, gt=0.0)
    f_rf: float = Field(default=0.4365, gt=0.0)

    def to_params(self) -> SquidParams:
        return SquidParams(l_ph=self.l_ph, ic_ua=self.ic_ua, cj_ff=self.cj_ff, f_rf=self.f_rf)


class HistogramSection(_Section):
    y0: float = 0.0
    y1: float = 1.0
    sigma: float = Field(default=625.0, gt=0.0)
    weight: float = Field(default=0.5, ge=0.0, le=1.0)
    accuracy: float = Field(default=0.05, gt=0.0, lt=1.0)
    samples: Optional[int] = Field(default=None, ge=1)
    trials: int = Field(default=100, ge=1)
    bins: int = Field(default=60, ge=1)

    def to_model(self) -> HistogramModel:
        return HistogramModel(y0=self.y0, y1=self.y1, sigma=self.sigma, weight=self.weight)

    def to_accuracy(self) -> AccuracySpec:
        return AccuracySpec(a_m=self.accuracy)


class ReadoutSection(_Section):
    """Detector response used by the end-to-end protocol."""

    y0: float = 0.0
    y1: float = 1.0
    sigma: float = Field(default=0.01, gt=0.0)

    def to_model(self, weight: float) -> HistogramModel:
        return HistogramModel(y0=self.y0, y1=self.y1, sigma=self.sigma, weight=weight)


class PriorSection(_Section):
    m_q_ph: float = Field(default=8.0, gt=0.0)
    i_cir_na: float = Field(default=140.0, gt=0.0)
    l_q_ph: float = Field(default=10.0, gt=0.0)
    phi_m_rms: float = Field(default=0.1, gt=0.0)

    def to_params(self) -> PriorSchemeParams:
        return PriorSchemeParams(**self.model_dump())


class ProtocolSection(_Section):
    c0_sq: float = Field(default=0.5, ge=0.0, le=1.0)
    shots: int = Field(default=400, ge=1)


class RunSection(_Section):
    seed: int = 42
    format: Literal["json", "csv"] = "json"
    dt_ns: Optional[float] = Field(default=None, gt=0.0)
    t_ns: Optional[float] = Field(default=None, gt=0.0)
    n_traj: int = Field(default=200, ge=1)
    record_every: int = Field(default=10, ge=1)
    grid_points: int = Field(default=8001, ge=1000)
    n_levels: int = Field(default=24, ge=2)
    out: Optional[str] = None


class RunConfig(_Section):
    scenario: Optional[str] = None
    qubit: QubitSection = QubitSection()
    pulse: PulseSection = PulseSection()
    noise: NoiseSection = NoiseSection()
    squid: SquidSection = SquidSection()
    histogram: HistogramSection = HistogramSection()
    readout: ReadoutSection = ReadoutSection()
    prior: PriorSection = PriorSection()
    protocol: ProtocolSection = ProtocolSection()
    run: RunSection = RunSection()


SECTIONS = tuple(name for name in RunConfig.model_fields if name != "scenario")


def _fold(values: Mapping[str, Optional[str]]) -> Dict[str, Dict[str, str]]:
    nested: Dict[str, Dict[str, str]] = {}
    for key, value in values.items():
        section, dot, field = key.partition(".")
        if not dot or not field:
            raise ConfigError("keys must have the form section.key", key=key)
        if section not in SECTIONS:
            raise ConfigError(f"unknown section (expected one of {', '.join(SECTIONS)})", key=key)
        if value is None:
            raise ConfigError("missing value", key=key)
        nested.setdefault(section, {})[field] = value
    return nested


def _dotted(loc) -> str:
    return ".".join(str(part) for part in loc)


def build_config(values: Mapping[str, Optional[str]], scenario: Optional[str] = None) -> RunConfig:
    """Validate flat dotted key/value pairs into a RunConfig."""
    nested = _fold(values)
    try:
        return RunConfig.model_validate({"scenario": scenario, **nested})
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(first["msg"], key=_dotted(first["loc"])) from exc


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, str]] = None,
    scenario: Optional[str] = None,
) -> RunConfig:
    values: Dict[str, Optional[str]] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values.update(dotenv_values(path, interpolate=False))
        logger.debug("read %d keys from %s", len(values), path)
    if overrides:
        values.update(overrides)
    return build_config(values, scenario=scenario)
