"""Request/response schemas of the HTTP service."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..config import RunConfig
from ..experiment import ScenarioResult


class ComplexMatrix(BaseModel):
    real: list[list[float]]
    imag: list[list[float]]

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "ComplexMatrix":
        m = np.asarray(matrix)
        return cls(real=np.real(m).tolist(), imag=np.imag(m).tolist())


class LeadingOrderOut(BaseModel):
    fidelity: float
    fidelity_error: float
    vacuum_weight: float
    vacuum_weight_error: float
    probability_exponent: float
    couplings: list[float]
    residuals_monotone: bool


class ScenarioOut(BaseModel):
    scenario: str
    structurally_zero: bool = False
    error: str | None = None
    coupling_1: float | None = None
    coupling_2: float | None = None
    probability: float | None = None
    fidelity: float | None = None
    vacuum_weight: float | None = None
    single_photon_weight: float | None = None
    multi_photon_weight: float | None = None
    leading_order: LeadingOrderOut | None = None
    rho3: ComplexMatrix | None = None
    rho3_occupations: list[list[int]] | None = None

    @classmethod
    def from_result(cls, result: ScenarioResult, include_rho3: bool = False) -> "ScenarioOut":
        lo = result.leading_order
        return cls(
            scenario=result.scenario,
            coupling_1=result.coupling_1,
            coupling_2=result.coupling_2,
            probability=result.probability,
            fidelity=result.fidelity,
            vacuum_weight=result.vacuum_weight,
            single_photon_weight=result.single_photon_weight,
            multi_photon_weight=result.multi_photon_weight,
            leading_order=LeadingOrderOut(
                fidelity=lo.fidelity,
                fidelity_error=lo.fidelity_error,
                vacuum_weight=lo.vacuum_weight,
                vacuum_weight_error=lo.vacuum_weight_error,
                probability_exponent=lo.probability_exponent,
                couplings=list(lo.couplings),
                residuals_monotone=lo.residuals_monotone,
            )
            if lo is not None
            else None,
            rho3=ComplexMatrix.from_array(result.rho3.matrix) if include_rho3 else None,
            rho3_occupations=[list(o) for o in result.rho3.space.basis] if include_rho3 else None,
        )


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig = Field(default_factory=RunConfig)
    include_rho3: bool = False


class RunResponse(BaseModel):
    report: dict
    scenarios: list[ScenarioOut]


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig


class SweepRow(BaseModel):
    ratio: float
    fidelity: float
    fidelity_error: float
    probability: float
    vacuum_weight: float


class SweepResponse(BaseModel):
    parameter: str = "coupling_ratio"
    rows: list[SweepRow]


class ValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cutoff: int = Field(4, ge=3, le=6)
    seed: int = 7
    perturb_bs_sign: bool = False


class CheckOut(BaseModel):
    name: str
    passed: bool
    detail: str


class ValidateResponse(BaseModel):
    all_passed: bool
    checks: list[CheckOut]


class TomographyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig = Field(default_factory=RunConfig)


class TomographyResponse(BaseModel):
    summary: dict


class HealthResponse(BaseModel):
    status: str
    version: str
