"""Run configuration: strict schema, YAML loading, documented defaults.

Unknown keys are rejected by name; out-of-range physics parameters are
rejected with the offending field in the error location. Angles are degrees
in the file and radians inside the package.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .experiment import Scenario, SetupConfig


class ConfigError(ValueError):
    """Configuration file rejected; the message names the offending keys."""


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SetupModel(StrictModel):
    coupling_1: float = Field(0.02, ge=0.0, lt=1.0, allow_inf_nan=False)
    coupling_2: float = Field(0.02, ge=0.0, lt=1.0, allow_inf_nan=False)
    input_angle_deg: float = Field(45.0, allow_inf_nan=False)
    preparation: Literal["polarizer_on_beam_1", "analyzer_before_p"] = "polarizer_on_beam_1"
    bob_analyzer_angle_deg: float | None = Field(None, allow_inf_nan=False)
    cutoff: int = Field(6, ge=4, le=12)
    bs_phase: float = Field(0.0, allow_inf_nan=False)
    efficiency_p: float = Field(1.0, ge=0.0, le=1.0)
    efficiency_f1: float = Field(1.0, ge=0.0, le=1.0)
    efficiency_f2: float = Field(1.0, ge=0.0, le=1.0)
    efficiency_d1: float = Field(1.0, ge=0.0, le=1.0)
    efficiency_d2: float = Field(1.0, ge=0.0, le=1.0)
    max_discard: float = Field(1e-6, gt=0.0, le=1e-2)

    def to_setup(self, cutoff_override: int | None = None) -> SetupConfig:
        return SetupConfig(
            coupling_1=self.coupling_1,
            coupling_2=self.coupling_2,
            input_angle=math.radians(self.input_angle_deg),
            preparation=self.preparation,
            bob_analyzer_angle=(
                math.radians(self.bob_analyzer_angle_deg)
                if self.bob_analyzer_angle_deg is not None
                else None
            ),
            cutoff=cutoff_override or self.cutoff,
            bs_phase=self.bs_phase,
            efficiency_p=self.efficiency_p,
            efficiency_f1=self.efficiency_f1,
            efficiency_f2=self.efficiency_f2,
            efficiency_d1=self.efficiency_d1,
            efficiency_d2=self.efficiency_d2,
            max_discard=self.max_discard,
        )


class ScenarioModel(StrictModel):
    kind: Literal[
        "threefold",
        "fourfold",
        "threefold_number_resolved_p",
        "threefold_cascade_p",
        "threefold_qnd_bob",
    ]
    stages: int = Field(2, ge=1, le=8)
    photon_number: int = Field(1, ge=0)

    def to_scenario(self) -> Scenario:
        return Scenario(kind=self.kind, stages=self.stages, photon_number=self.photon_number)


class SweepModel(StrictModel):
    parameter: Literal["coupling_ratio"] = "coupling_ratio"
    values: list[float] = Field(min_length=1)

    @field_validator("values")
    @classmethod
    def _positive_finite(cls, values: list[float]) -> list[float]:
        for v in values:
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"sweep values must be positive and finite, got {v}")
        return values


class TomographyModel(StrictModel):
    shots: int | None = Field(None, ge=1)
    scenario: ScenarioModel = ScenarioModel(kind="threefold")


class RunConfig(StrictModel):
    setup: SetupModel = SetupModel()
    scenarios: list[ScenarioModel] = Field(
        default_factory=lambda: [ScenarioModel(kind="threefold"), ScenarioModel(kind="fourfold")],
        min_length=1,
    )
    sweep: SweepModel | None = None
    tomography: TomographyModel | None = None
    seed: int = 0
    baseline_trials: int = Field(100_000, ge=1, le=100_000_000)


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a YAML run configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    return parse_config(raw)
