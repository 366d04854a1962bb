"""End-to-end drivers shared by the service endpoints.

Each driver consumes a validated RunConfig and returns plain dicts/dataclasses
ready for serialization, so the HTTP layer stays a thin shell.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import analysis, experiment, tomography
from .config import RunConfig
from .detection import ZeroProbabilityError
from .experiment import Scenario, ScenarioResult
from .extrapolate import coupling_ladder, richardson


@dataclass(frozen=True)
class ScenarioOutcome:
    label: str
    result: ScenarioResult | None
    structurally_zero: bool = False
    error: str | None = None


def run_scenarios(config: RunConfig) -> tuple[list[ScenarioOutcome], dict]:
    """Evaluate every configured scenario and build the versioned report."""
    setup = config.setup.to_setup()
    outcomes: list[ScenarioOutcome] = []
    for model in config.scenarios:
        scenario = model.to_scenario()
        try:
            result = experiment.evaluate(setup, scenario)
            outcomes.append(ScenarioOutcome(label=scenario.label, result=result))
        except ZeroProbabilityError as exc:
            outcomes.append(
                ScenarioOutcome(label=scenario.label, result=None, structurally_zero=True, error=str(exc))
            )
    baseline = analysis.classical_baseline(config.baseline_trials, config.seed)
    rows = [
        analysis.scenario_row(o.result, baseline.analytic) for o in outcomes if o.result is not None
    ]
    for o in outcomes:
        if o.structurally_zero:
            rows.append(
                {
                    "scenario": o.label,
                    "probability": 0.0,
                    "structurally_zero": True,
                    "exceeds_classical_baseline": False,
                }
            )
    report = analysis.build_report(
        [o.result for o in outcomes if o.result is not None],
        baseline,
        seed=config.seed,
        allow_empty=True,
    )
    if rows:
        report["scenarios"] = rows
    return outcomes, report


def run_sweep(config: RunConfig) -> list[dict]:
    """Coupling-ratio sweep rows, sorted by ratio."""
    if config.sweep is None:
        raise ValueError("config has no sweep section")
    setup = config.setup.to_setup()
    points = experiment.coupling_ratio_sweep(setup, config.sweep.values)
    return [
        {
            "ratio": p.ratio,
            "fidelity": p.fidelity,
            "fidelity_error": p.fidelity_error,
            "probability": p.probability,
            "vacuum_weight": p.vacuum_weight,
        }
        for p in points
    ]


def run_tomography(config: RunConfig) -> dict:
    """Reconstruct the conditional output of the tomography scenario.

    Exact-probability reconstruction runs on every rung of the coupling
    ladder so the vacuum-weight estimate can be extrapolated to zero
    coupling; a finite-shot reconstruction at the configured coupling is
    added when `shots` is set.
    """
    setup = config.setup.to_setup()
    tomo = config.tomography
    scenario = tomo.scenario.to_scenario() if tomo is not None else Scenario("threefold")
    shots = tomo.shots if tomo is not None else None
    settings = tomography.default_settings()

    ladder = coupling_ladder(setup.coupling_1)
    ratio = setup.coupling_2 / setup.coupling_1
    estimates = []
    base_rho3 = None
    base_table = None
    base_rec = None
    base_leakage = 0.0
    for g in ladder:
        cfg = replace(setup, coupling_1=g, coupling_2=ratio * g)
        rho3 = experiment.run_scenario(cfg, scenario).rho3
        table = tomography.tomography_probabilities(rho3, settings)
        rec = tomography.reconstruct(table, truth=rho3)
        estimates.append(rec.vacuum_weight_estimate)
        if base_rho3 is None:
            base_rho3 = rho3
            base_table = table
            base_rec = rec
            _, base_leakage = tomography.sector_matrix(rho3)
    extrap = richardson(np.array([g**2 for g in ladder]), np.array(estimates))

    out: dict = {
        "schema_version": analysis.SCHEMA_VERSION,
        "scenario": scenario.label,
        "settings": list(tomography.BASES),
        "exact": {
            "probabilities": base_table,
            "vacuum_weight_estimate": base_rec.vacuum_weight_estimate,
            "fidelity_to_truth": base_rec.fidelity_to_truth,
            "multiphoton_leakage": base_leakage,
        },
        "extrapolated_vacuum_weight": {"value": extrap.value, "error": extrap.error},
    }
    if shots:
        counts = tomography.sample_counts(base_table, shots, config.seed)
        rec_counts = tomography.reconstruct(counts, truth=base_rho3)
        out["sampled"] = {
            "shots": shots,
            "seed": config.seed,
            "counts": counts,
            "vacuum_weight_estimate": rec_counts.vacuum_weight_estimate,
            "fidelity_to_truth": rec_counts.fidelity_to_truth,
        }
    return out
