"""JSON run configuration (validated with pydantic)."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .dynamics import IntegratorConfig
from .model import PhysParams


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class ParamsModel(_Strict):
    m: float = Field(1.0, gt=0, description="mass (reduced mass taken as given)")
    k: float = Field(1.0, gt=0, description="central-force coupling")
    lam: float = Field(0.0, ge=0, alias="lambda", description="damping rate")
    hbar: float = Field(1.0, gt=0, description="reduced Planck constant")
    Omega: float = Field(1.0, ge=0, description="oscillator angular frequency (oscillator-side systems)")
    c: float = Field(1.0, gt=0, description="time-reparametrization constant dt/dtau = r/c")
    gamma: float = Field(1.0, gt=0, description="Levi-Civita scale Z = gamma U^2")
    cal_E: Optional[float] = Field(None, description="conserved cal_E for the sextic oscillator; "
                                                     "computed from the state when omitted")

    def to_params(self) -> PhysParams:
        return PhysParams(m=self.m, k=self.k, lam=self.lam, hbar=self.hbar, Omega=self.Omega,
                          c=self.c, gamma=self.gamma, cal_E=self.cal_E)


class StateModel(_Strict):
    q1: float = 1.0
    q2: float = 0.0
    v1: float = 0.0
    v2: float = 1.0
    s: float = Field(0.0, description="initial value of the frame's time variable")


class IntegratorModel(_Strict):
    rel_tol: float = Field(1e-10, gt=0, lt=1)
    abs_tol: float = Field(1e-12, gt=0, lt=1)
    max_step: Optional[float] = Field(None, gt=0, description="null means unbounded")
    initial_step: Optional[float] = Field(None, gt=0)
    r_min_event: float = Field(1e-6, ge=0, description="collision-proximity threshold (Kepler frames)")
    dense_output: bool = True
    method: Literal["DOP853", "RK45"] = "DOP853"
    n_samples: Optional[int] = Field(None, ge=2, description="uniform output samples; null keeps solver steps")

    def to_config(self) -> IntegratorConfig:
        return IntegratorConfig(
            rel_tol=self.rel_tol, abs_tol=self.abs_tol,
            max_step=math.inf if self.max_step is None else self.max_step,
            initial_step=self.initial_step, r_min_event=self.r_min_event,
            dense_output=self.dense_output, method=self.method, n_samples=self.n_samples)


class QuantumModel(_Strict):
    omega0: float = Field(1.0, gt=0, description="unperturbed oscillator frequency Omega0 of the sextic side")


class RunConfig(_Strict):
    units: Literal["natural"] = "natural"
    params: ParamsModel = ParamsModel()
    state: StateModel = StateModel()
    integrator: IntegratorModel = IntegratorModel()
    quantum: QuantumModel = QuantumModel()
    span: Tuple[float, float] = Field((0.0, 40.0), description="default integration span")

    @field_validator("span")
    @classmethod
    def _increasing(cls, v):
        if not v[1] > v[0]:
            raise ValueError("span must be increasing")
        return v

    def resolved(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)


class ConfigError(ValueError):
    """Configuration could not be read or validated."""


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(data)


def parse_config(data) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from None


def json_schema() -> dict:
    return RunConfig.model_json_schema(by_alias=True)
