"""The four-beam teleportation bench: assembly, scenarios, leading-order limits.

Two pair sources feed the apparatus: source I on beams (1, 4), source II on
beams (2, 3). Beam 4 is heralded at detector p, beam 1 carries the prepared
input, beams 1 and 2 interfere on a 50:50 splitter watched by f1 and f2, and
beam 3 leaves toward the receiver, optionally analyzed by d1/d2. Scenarios
differ only in the coincidence condition imposed on the detectors; each run
returns the conditional beam-3 state, the event probability, and the overlap
with the prepared input.

Leading-order quantities are obtained by evaluating at a descending coupling
ladder and Richardson-extrapolating in the squared coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np

from . import detection, fock, optics, sources
from .detection import Requirement, ZeroProbabilityError
from .extrapolate import coupling_ladder, richardson
from .fock import DensityOperator, FockSpace, Mode, StateVector, beam_modes
from .optics import ModeTransform
from .sources import SpdcParams, TruncationError

PreparationKind = Literal["polarizer_on_beam_1", "analyzer_before_p"]
ScenarioKind = Literal[
    "threefold",
    "fourfold",
    "threefold_number_resolved_p",
    "threefold_cascade_p",
    "threefold_qnd_bob",
]

SCENARIO_KINDS: tuple[str, ...] = (
    "threefold",
    "fourfold",
    "threefold_number_resolved_p",
    "threefold_cascade_p",
    "threefold_qnd_bob",
)

# Couplings above this make the three-pair truncation guard trip at cutoff 6,
# so ratio sweeps rescale their ladder to stay below it.
MAX_SWEEP_COUPLING = 0.08

DETECTOR_NAMES = ("p", "f1", "f2", "d1", "d2")


@dataclass(frozen=True)
class SetupConfig:
    """Bench parameters: source strengths, preparation, detectors, truncation."""

    coupling_1: float = 0.02
    coupling_2: float = 0.02
    input_angle: float = math.pi / 4
    preparation: PreparationKind = "polarizer_on_beam_1"
    bob_analyzer_angle: float | None = None
    cutoff: int = 6
    bs_phase: float = 0.0
    efficiency_p: float = 1.0
    efficiency_f1: float = 1.0
    efficiency_f2: float = 1.0
    efficiency_d1: float = 1.0
    efficiency_d2: float = 1.0
    max_discard: float = sources.DEFAULT_MAX_DISCARD

    def __post_init__(self) -> None:
        for name, g in (("coupling_1", self.coupling_1), ("coupling_2", self.coupling_2)):
            if not 0.0 <= g < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {g}")
        if self.cutoff < 4:
            raise ValueError("cutoff must be at least 4 (two pairs representable)")
        if self.preparation not in ("polarizer_on_beam_1", "analyzer_before_p"):
            raise ValueError(f"unknown preparation {self.preparation!r}")
        for name in ("p", "f1", "f2", "d1", "d2"):
            eta = getattr(self, f"efficiency_{name}")
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"efficiency_{name} must be in [0, 1]")

    def efficiency(self, detector: str) -> float:
        return getattr(self, f"efficiency_{detector}")


@dataclass(frozen=True)
class Scenario:
    """A coincidence condition. `stages` applies to cascades, `photon_number`
    to the number-resolved and non-demolition variants."""

    kind: ScenarioKind
    stages: int = 2
    photon_number: int = 1

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.stages < 1:
            raise ValueError("stages must be >= 1")
        if self.photon_number < 0:
            raise ValueError("photon_number must be >= 0")

    @property
    def label(self) -> str:
        if self.kind == "threefold_cascade_p":
            return f"threefold_cascade_p{self.stages}"
        return self.kind


@dataclass(frozen=True)
class Apparatus:
    """Compiled bench: space, ordered elements, coincidence requirements."""

    space: FockSpace
    transforms: tuple[ModeTransform, ...]
    requirements: tuple[Requirement, ...]
    post_transforms: tuple[ModeTransform, ...]
    source_1: SpdcParams
    source_2: SpdcParams
    loss_modes: tuple[Mode, ...]


@dataclass(frozen=True)
class LeadingOrder:
    """Zero-coupling limits with extrapolation error estimates."""

    fidelity: float
    fidelity_error: float
    vacuum_weight: float
    vacuum_weight_error: float
    probability_exponent: float
    couplings: tuple[float, ...]
    residuals_monotone: bool


@dataclass(frozen=True)
class ScenarioResult:
    """Conditional output of one scenario at one coupling point."""

    scenario: str
    coupling_1: float
    coupling_2: float
    rho3: DensityOperator
    probability: float
    fidelity: float
    vacuum_weight: float
    single_photon_weight: float
    multi_photon_weight: float
    leading_order: LeadingOrder | None = None


def _loss_splitters(modes: Sequence[Mode], eta: float, tag: str) -> tuple[list[ModeTransform], list[Mode]]:
    outs: list[ModeTransform] = []
    loss: list[Mode] = []
    for i, m in enumerate(modes):
        lm = Mode(f"loss_{tag}.{i}", m.pol)
        outs.append(optics.beamsplitter(m, lm, eta))
        loss.append(lm)
    return outs, loss


def build_circuit(config: SetupConfig, scenario: Scenario | None = None) -> Apparatus:
    """Compile the bench for a scenario (threefold when omitted).

    Layout: preparation element per config, the central 50:50 splitter on
    beams 1 and 2 (f1 and f2 watch its outputs), heralding detector p on beam
    4, and — per scenario — a splitting cascade at p or the d1/d2 analyzers on
    beam 3. Sub-unit detector efficiencies insert loss splitters ahead of the
    ideal detectors.
    """
    scenario = scenario or Scenario("threefold")
    b1h, b1v = beam_modes(1)
    b2h, b2v = beam_modes(2)
    b3h, b3v = beam_modes(3)
    b4h, b4v = beam_modes(4)
    modes: list[Mode] = [b1h, b1v, b2h, b2v, b3h, b3v, b4h, b4v]
    loss_modes: list[Mode] = []
    transforms: list[ModeTransform] = []
    post: list[ModeTransform] = []

    if config.preparation == "polarizer_on_beam_1":
        dump = Mode("loss_prep", "H")
        transforms.extend(optics.polarizer(b1h, b1v, config.input_angle, dump))
        modes.append(dump)
        loss_modes.append(dump)
    else:
        # Heralding analyzer: passing the orthogonal angle at p projects the
        # entangled partner in beam 1 onto the input angle.
        dump = Mode("loss_prep", "H")
        transforms.extend(
            optics.polarizer(b4h, b4v, config.input_angle + math.pi / 2, dump)
        )
        modes.append(dump)
        loss_modes.append(dump)

    transforms.append(optics.beamsplitter(b1h, b2h, 0.5, config.bs_phase))
    transforms.append(optics.beamsplitter(b1v, b2v, 0.5, config.bs_phase))

    requirements: list[Requirement] = []

    # Heralding condition at p.
    p_groups: list[tuple[Mode, ...]] = [(b4h, b4v)]
    if scenario.kind == "threefold_cascade_p" and scenario.stages > 1:
        k = scenario.stages
        stage_beams = [f"p_stage{t}" for t in range(2, k + 1)]
        dft = np.exp(2j * math.pi * np.outer(np.arange(k), np.arange(k)) / k) / math.sqrt(k)
        for pol, lead in (("H", b4h), ("V", b4v)):
            group = (lead,) + tuple(Mode(b, pol) for b in stage_beams)
            transforms.append(optics.ModeTransform(group, dft, label=f"split_p_{pol}"))
        for b in stage_beams:
            modes.extend(beam_modes(b))
        for b in stage_beams:
            p_groups.append(beam_modes(b))
        requirements.append(
            Requirement(tuple(p_groups), "clicked_eq", value=1, label="p:clicks=1")
        )
    elif scenario.kind == "threefold_number_resolved_p":
        requirements.append(detection.total_count("p", (b4h, b4v), scenario.photon_number))
    else:
        requirements.append(detection.click("p", (b4h, b4v)))

    requirements.append(detection.click("f1", (b1h, b1v)))
    requirements.append(detection.click("f2", (b2h, b2v)))

    if scenario.kind == "fourfold":
        if config.bob_analyzer_angle is not None:
            transforms.append(optics.polarization_rotation(b3h, b3v, -config.bob_analyzer_angle))
            post.append(optics.polarization_rotation(b3h, b3v, config.bob_analyzer_angle))
        requirements.append(detection.exactly_one_clicked("d", [(b3h,), (b3v,)]))
    elif scenario.kind == "threefold_qnd_bob":
        requirements.append(detection.total_count("bob_qnd", (b3h, b3v), scenario.photon_number))

    # Efficiency loss channels ahead of the ideal detectors.
    for name, watched in (("p", (b4h, b4v)), ("f1", (b1h, b1v)), ("f2", (b2h, b2v))):
        eta = config.efficiency(name)
        if eta < 1.0:
            splitters, lm = _loss_splitters(watched, eta, name)
            transforms.extend(splitters)
            modes.extend(lm)
            loss_modes.extend(lm)
    if scenario.kind == "fourfold":
        for name, watched in (("d1", (b3h,)), ("d2", (b3v,))):
            eta = config.efficiency(name)
            if eta < 1.0:
                splitters, lm = _loss_splitters(watched, eta, name)
                transforms.extend(splitters)
                modes.extend(lm)
                loss_modes.extend(lm)

    space = FockSpace(tuple(modes), config.cutoff)
    return Apparatus(
        space=space,
        transforms=tuple(transforms),
        requirements=tuple(requirements),
        post_transforms=tuple(post),
        source_1=SpdcParams(config.coupling_1, config.cutoff // 2, (1, 4)),
        source_2=SpdcParams(config.coupling_2, config.cutoff // 2, (2, 3)),
        loss_modes=tuple(loss_modes),
    )


def initial_state(apparatus: Apparatus, max_discard: float) -> StateVector:
    """Tensor both source emissions and embed at the bench cutoff."""
    local_1 = FockSpace(beam_modes(1) + beam_modes(4), 2 * apparatus.source_1.max_pairs)
    local_2 = FockSpace(beam_modes(2) + beam_modes(3), 2 * apparatus.source_2.max_pairs)
    s1 = sources.spdc_state(apparatus.source_1, local_1, max_discard)
    s2 = sources.spdc_state(apparatus.source_2, local_2, max_discard)
    product = fock.tensor(s1, s2)
    state, discarded = fock.restrict(product, apparatus.space)
    if discarded > max_discard:
        raise TruncationError(
            f"joint emission truncation discards weight {discarded:.3e} > {max_discard:.1e}"
        )
    return state


def run_scenario(config: SetupConfig, scenario: Scenario) -> ScenarioResult:
    """Conditional beam-3 state, event probability, and fidelity at one coupling.

    Raises ZeroProbabilityError for structurally impossible patterns (for
    example with both couplings zero).
    """
    apparatus = build_circuit(config, scenario)
    state = initial_state(apparatus, config.max_discard)
    state = optics.apply_circuit(state, apparatus.transforms)
    conditioned, probability = detection.condition_vector(state, apparatus.requirements)
    conditioned = optics.apply_circuit(conditioned, apparatus.post_transforms)
    rho3 = fock.partial_trace(conditioned, beam_modes(3))
    rho3, _ = rho3.normalized()

    totals = rho3.space.totals
    diag = np.real(np.diag(rho3.matrix))
    vacuum_weight = float(diag[totals == 0].sum())
    single = float(diag[totals == 1].sum())
    multi = float(diag[totals >= 2].sum())
    phi = fock.polarized_photon(rho3.space, 3, config.input_angle)
    fidelity = fock.fidelity_pure(rho3, phi)
    return ScenarioResult(
        scenario=scenario.label,
        coupling_1=config.coupling_1,
        coupling_2=config.coupling_2,
        rho3=rho3,
        probability=probability,
        fidelity=fidelity,
        vacuum_weight=vacuum_weight,
        single_photon_weight=single,
        multi_photon_weight=multi,
    )


def leading_order(
    config: SetupConfig,
    scenario: Scenario,
    couplings: Sequence[float] | None = None,
) -> tuple[LeadingOrder, list[ScenarioResult]]:
    """Extrapolate fidelity and vacuum weight to zero coupling.

    `couplings` is a strictly decreasing ladder for source I; source II keeps
    the configured coupling ratio. Defaults to a four-point geometric ladder
    descending from the configured coupling.
    """
    if couplings is None:
        couplings = coupling_ladder(config.coupling_1)
    couplings = tuple(couplings)
    if len(couplings) < 3:
        raise ValueError("leading-order extraction needs at least three couplings")
    ratio = config.coupling_2 / config.coupling_1
    samples: list[ScenarioResult] = []
    for g in couplings:
        cfg = replace(config, coupling_1=g, coupling_2=ratio * g)
        samples.append(run_scenario(cfg, scenario))
    h = np.array([g**2 for g in couplings])
    fid = richardson(h, np.array([s.fidelity for s in samples]))
    vac = richardson(h, np.array([s.vacuum_weight for s in samples]))
    slope = np.polyfit(
        np.log([s.coupling_1 for s in samples]), np.log([s.probability for s in samples]), 1
    )[0]
    lo = LeadingOrder(
        fidelity=fid.value,
        fidelity_error=fid.error,
        vacuum_weight=vac.value,
        vacuum_weight_error=vac.error,
        probability_exponent=float(slope),
        couplings=couplings,
        residuals_monotone=fid.residuals_monotone,
    )
    return lo, samples


def evaluate(
    config: SetupConfig, scenario: Scenario, extrapolate: bool = True
) -> ScenarioResult:
    """Run a scenario at the configured coupling, attaching leading-order data."""
    result = run_scenario(config, scenario)
    if not extrapolate:
        return result
    lo, _ = leading_order(config, scenario)
    return replace(result, leading_order=lo)


@dataclass(frozen=True)
class SweepPoint:
    ratio: float
    fidelity: float
    fidelity_error: float
    probability: float
    vacuum_weight: float


def coupling_ratio_sweep(
    config: SetupConfig,
    ratios: Sequence[float],
    scenario: Scenario | None = None,
) -> list[SweepPoint]:
    """Leading-order fidelity versus the source-strength ratio r = g_II / g_I.

    Raising the receiver-side source relative to the heralded one suppresses
    the vacuum class, so fidelity increases monotonically in r with the value
    1/2 at r = 1. The ladder is rescaled so the stronger source stays inside
    the truncation guard. Reported probability is the event probability at the
    ladder's base point.
    """
    if not ratios or any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive and non-empty")
    scenario = scenario or Scenario("threefold")
    rows = []
    for r in sorted(ratios):
        base = min(config.coupling_1, MAX_SWEEP_COUPLING / max(r, 1.0))
        cfg = replace(config, coupling_1=base, coupling_2=r * base)
        lo, samples = leading_order(cfg, scenario)
        rows.append(
            SweepPoint(
                ratio=float(r),
                fidelity=lo.fidelity,
                fidelity_error=lo.fidelity_error,
                probability=samples[0].probability,
                vacuum_weight=lo.vacuum_weight,
            )
        )
    return rows


def input_independence_check(
    config: SetupConfig,
    scenario: Scenario,
    angles: Sequence[float],
) -> float:
    """Max spread of leading-order fidelity over input polarization angles."""
    if len(angles) < 4:
        raise ValueError("need at least four angles spanning [0, pi)")
    values = []
    for theta in angles:
        cfg = replace(config, input_angle=theta)
        lo, _ = leading_order(cfg, scenario)
        values.append(lo.fidelity)
    return float(max(values) - min(values))
