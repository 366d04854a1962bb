"""Cross-module structural invariant suite.

Runs the library's structural guarantees — unitarity of lifted elements, the
lift homomorphism, photon-number conservation, POVM completeness, partial
trace consistency, positivity under conditioning, the pinned beamsplitter
convention, and oracle equivalence — and reports one pass/fail result per
property. Failures are results, not exceptions.

`perturb_bs_sign` is a self-test hook: it flips the convention sign of the
beamsplitter used in the pinned-convention check, which must fail while
unitarity still passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import detection, fock, optics, oracle
from .experiment import Scenario, SetupConfig, run_scenario
from .fock import FockSpace, Mode, beam_modes


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = g @ g.conj().T
    return m / np.trace(m).real


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def run_invariant_suite(
    cutoff: int = 4, seed: int = 7, perturb_bs_sign: bool = False
) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks: list[CheckResult] = []
    a, b = Mode("a", "H"), Mode("a", "V")
    two_mode = FockSpace((a, b), cutoff)

    # Unitarity of every element kind on the truncated space.
    elements = [
        optics.beamsplitter(a, b, 0.37, 0.4),
        optics.polarization_rotation(a, b, 0.7),
        optics.half_wave(a, b, 0.3),
        optics.quarter_wave(a, b, 1.1),
        optics.phase_shift(a, 0.9),
    ]
    worst = 0.0
    for el in elements:
        u = optics.lift(el, two_mode).to_sparse().toarray()
        worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(two_mode.dim)))))
    pbs_space = FockSpace(beam_modes("a") + beam_modes("b"), cutoff)
    u = optics.lift(optics.pbs("a", "b"), pbs_space).to_sparse().toarray()
    worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(pbs_space.dim)))))
    checks.append(_check("lift_unitarity", worst <= 1e-10, f"max |U†U - I| = {worst:.3e}"))

    # Homomorphism on random two-mode unitaries.
    worst = 0.0
    for _ in range(3):
        mu = _random_unitary(rng, 2)
        mv = _random_unitary(rng, 2)
        lu = optics.lift(optics.ModeTransform((a, b), mu), two_mode).to_sparse().toarray()
        lv = optics.lift(optics.ModeTransform((a, b), mv), two_mode).to_sparse().toarray()
        luv = optics.lift(optics.ModeTransform((a, b), mu @ mv), two_mode).to_sparse().toarray()
        worst = max(worst, float(np.max(np.abs(luv - lu @ lv))))
    checks.append(_check("lift_homomorphism", worst <= 1e-10, f"max |L(UV) - L(U)L(V)| = {worst:.3e}"))

    # Photon-number conservation: lifted unitaries commute with the total number.
    n_diag = two_mode.totals.astype(float)
    worst = 0.0
    for el in elements:
        u = optics.lift(el, two_mode).to_sparse().toarray()
        comm = u * n_diag[None, :] - n_diag[:, None] * u
        worst = max(worst, float(np.max(np.abs(comm))))
    checks.append(_check("photon_number_conservation", worst <= 1e-12, f"max |[U, N]| = {worst:.3e}"))

    # POVM completeness and positivity for every detector model.
    detectors = [
        detection.DetectorModel("t1", "threshold", (a, b), 1.0),
        detection.DetectorModel("t2", "threshold", (a, b), 0.7),
        detection.DetectorModel("nr", "number_resolving", (a, b), 0.8),
        detection.DetectorModel("c2", "cascade", (a, b), 1.0, stages=2),
        detection.DetectorModel("c3", "cascade", (a,), 0.9, stages=3),
    ]
    worst = 0.0
    worst_eig = 0.0
    for det in detectors:
        els = detection.povm(det, cutoff)
        total = sum(e.operator for e in els)
        worst = max(worst, float(np.max(np.abs(total - np.eye(els[0].space.dim)))))
        worst_eig = min(worst_eig, min(e.min_eigenvalue() for e in els))
    ok = worst <= 1e-10 and worst_eig >= -1e-12
    checks.append(_check("povm_completeness", ok, f"max |sum E - I| = {worst:.3e}, min eig = {worst_eig:.3e}"))

    # Partial trace preserves trace on random density operators.
    space3 = FockSpace((Mode("x", "H"), Mode("x", "V"), Mode("y", "H")), 3)
    worst = 0.0
    for _ in range(3):
        rho = fock.DensityOperator(space3, fock.hermitize(_random_density(rng, space3.dim)))
        reduced = fock.partial_trace(rho, (Mode("x", "H"), Mode("x", "V")))
        worst = max(worst, abs(reduced.trace - rho.trace))
    checks.append(_check("partial_trace_consistency", worst <= 1e-12, f"max |tr drift| = {worst:.3e}"))

    # Positivity after conditioning and tracing, on the real apparatus.
    cfg = SetupConfig(coupling_1=0.05, coupling_2=0.05, cutoff=cutoff)
    min_eig = 0.0
    for scenario in (Scenario("threefold"), Scenario("fourfold")):
        rho3 = run_scenario(cfg, scenario).rho3
        min_eig = min(min_eig, rho3.min_eigenvalue())
    checks.append(_check("conditioning_positivity", min_eig >= -1e-10, f"min eigenvalue = {min_eig:.3e}"))

    # Pinned beamsplitter convention: |1,0> -> (|1,0> - |0,1>)/sqrt(2) at phase 0.
    bs_matrix = optics.beamsplitter(a, b, 0.5).matrix.copy()
    if perturb_bs_sign:
        bs_matrix = bs_matrix.T  # moves the convention sign to the other reflection
    perturbed = optics.ModeTransform((a, b), bs_matrix)
    out = optics.apply_transform(fock.basis_state(two_mode, (1, 0)), perturbed)
    expected = {
        two_mode.index_of((1, 0)): 1 / math.sqrt(2),
        two_mode.index_of((0, 1)): -1 / math.sqrt(2),
    }
    dev = max(
        abs(out.amps.get(i, 0.0) - v) for i, v in expected.items()
    )
    checks.append(_check("pinned_bs_convention", dev <= 1e-12, f"max amplitude deviation = {dev:.3e}"))

    # Oracle equivalence on scenario probabilities, fidelities, and rho3.
    worst = 0.0
    for scenario in (
        Scenario("threefold"),
        Scenario("fourfold"),
        Scenario("threefold_number_resolved_p"),
        Scenario("threefold_cascade_p", stages=2),
        Scenario("threefold_qnd_bob"),
    ):
        main = run_scenario(cfg, scenario)
        ref = oracle.run_scenario(cfg, scenario)
        worst = max(worst, max(oracle.compare(main, ref).values()))
    checks.append(_check("oracle_equivalence", worst <= 1e-10, f"max deviation = {worst:.3e}"))

    return checks


def all_passed(checks: list[CheckResult]) -> bool:
    return all(c.passed for c in checks)
