"""HTTP front of the simulator: stateless compute endpoints.

Every endpoint takes a validated run configuration and returns finished
numbers; nothing is stored server-side, so instances scale horizontally and
results are reproducible from the request body alone.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, validate, workflows
from ..config import ConfigError
from ..sources import TruncationError
from .models import (
    CheckOut,
    HealthResponse,
    RunRequest,
    RunResponse,
    ScenarioOut,
    SweepRequest,
    SweepResponse,
    SweepRow,
    TomographyRequest,
    TomographyResponse,
    ValidateRequest,
    ValidateResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="telesim",
        version=__version__,
        description="Conditional-output simulator for a two-source linear-optics teleportation bench.",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/run", response_model=RunResponse)
    def run(request: RunRequest) -> RunResponse:
        try:
            outcomes, report = workflows.run_scenarios(request.config)
        except (ConfigError, TruncationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        scenarios = []
        for o in outcomes:
            if o.result is not None:
                scenarios.append(ScenarioOut.from_result(o.result, request.include_rho3))
            else:
                scenarios.append(
                    ScenarioOut(scenario=o.label, structurally_zero=True, error=o.error)
                )
        return RunResponse(report=report, scenarios=scenarios)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(request: SweepRequest) -> SweepResponse:
        try:
            rows = workflows.run_sweep(request.config)
        except (ConfigError, TruncationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return SweepResponse(rows=[SweepRow(**r) for r in rows])

    @app.post("/validate", response_model=ValidateResponse)
    def run_validation(request: ValidateRequest) -> ValidateResponse:
        checks = validate.run_invariant_suite(
            cutoff=request.cutoff, seed=request.seed, perturb_bs_sign=request.perturb_bs_sign
        )
        return ValidateResponse(
            all_passed=validate.all_passed(checks),
            checks=[CheckOut(name=c.name, passed=c.passed, detail=c.detail) for c in checks],
        )

    @app.post("/tomography", response_model=TomographyResponse)
    def run_tomography(request: TomographyRequest) -> TomographyResponse:
        try:
            summary = workflows.run_tomography(request.config)
        except (ConfigError, TruncationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return TomographyResponse(summary=summary)

    return app


app = create_app()
