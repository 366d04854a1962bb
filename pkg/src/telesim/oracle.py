"""Independent dense full-enumeration reference engine.

Cross-checks the sparse pipeline with deliberately different machinery:

* its own graded-lexicographic basis enumeration and index maps,
* dense state vectors over the full truncated basis,
* mode unitaries lifted by exponentiating quadratic generators
  (``expm_multiply`` of sum_jk log(U)_jk a†_j a_k) instead of the
  multinomial expansion,
* source emission by exponentiating the pair-creation generator,
* conditioning by explicit outcome classification of every basis state,
* partial trace by explicit grouping over the dense vector.

Only the configuration dataclasses and mode labels are shared with the main
pipeline; all physics is recomputed here from the documented conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.linalg import expm_multiply

from .experiment import Scenario, ScenarioResult, SetupConfig
from .extrapolate import coupling_ladder, richardson
from .fock import Mode, beam_modes


class Basis:
    """Graded-lexicographic occupation basis with sparse ladder operators."""

    def __init__(self, modes: Sequence[Mode], cutoff: int):
        self.modes = tuple(modes)
        self.cutoff = cutoff
        occs: list[tuple[int, ...]] = []
        n = len(self.modes)

        def gen(prefix: tuple[int, ...], remaining: int, budget: int) -> None:
            if remaining == 0:
                occs.append(prefix)
                return
            for k in range(budget + 1):
                gen(prefix + (k,), remaining - 1, budget - k)

        gen((), n, cutoff)
        occs.sort(key=lambda o: (sum(o), o))
        self.occs = occs
        self.index = {o: i for i, o in enumerate(occs)}
        self.occ_arr = np.array(occs, dtype=np.int64)
        self.dim = len(occs)

    def position(self, mode: Mode) -> int:
        return self.modes.index(mode)

    def creation(self, mode: Mode) -> scipy.sparse.csr_matrix:
        p = self.position(mode)
        rows, cols, vals = [], [], []
        for i, occ in enumerate(self.occs):
            if sum(occ) + 1 <= self.cutoff:
                up = list(occ)
                up[p] += 1
                rows.append(self.index[tuple(up)])
                cols.append(i)
                vals.append(math.sqrt(occ[p] + 1))
        return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def annihilation(self, mode: Mode) -> scipy.sparse.csr_matrix:
        return self.creation(mode).T.tocsr()

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[(0,) * len(self.modes)]] = 1.0
        return v

    def quadratic_generator(self, h: np.ndarray, modes: Sequence[Mode]) -> scipy.sparse.csr_matrix:
        """sum_jk h[j, k] a†_j a_k over the given modes."""
        total = scipy.sparse.csr_matrix((self.dim, self.dim), dtype=complex)
        ops = [self.creation(m) for m in modes]
        ann = [self.annihilation(m) for m in modes]
        for j in range(len(modes)):
            for k in range(len(modes)):
                if abs(h[j, k]) > 1e-16:
                    total = total + h[j, k] * (ops[j] @ ann[k])
        return total

    def apply_unitary(self, psi: np.ndarray, u: np.ndarray, modes: Sequence[Mode]) -> np.ndarray:
        gen = self.quadratic_generator(scipy.linalg.logm(np.asarray(u, dtype=complex)), modes)
        return expm_multiply(gen, psi)


def _bs_matrix(transmissivity: float, phase: float) -> np.ndarray:
    t = math.sqrt(transmissivity)
    r = math.sqrt(1.0 - transmissivity)
    return np.array(
        [[t, np.exp(1j * phase) * r], [-np.exp(-1j * phase) * r, t]], dtype=complex
    )


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


_SWAP = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class OracleResult:
    probability: float
    fidelity: float
    vacuum_weight: float
    rho3_occs: tuple[tuple[int, int], ...]
    rho3: np.ndarray


def _source_vector(basis: Basis, g: float, beams: tuple[int | str, int | str], max_pairs: int,
                   max_discard: float) -> np.ndarray:
    """exp(g K†)|0> truncated at max_pairs pairs and renormalized, embedded in `basis`."""
    i, j = beams
    local = Basis(beam_modes(i) + beam_modes(j), 2 * (max_pairs + 1))
    ih, iv = beam_modes(i)
    jh, jv = beam_modes(j)
    k_dag = local.creation(ih) @ local.creation(jv) - local.creation(iv) @ local.creation(jh)
    psi = expm_multiply(g * k_dag, local.vacuum())
    totals = local.occ_arr.sum(axis=1)
    guard = float(np.sum(np.abs(psi[totals == 2 * (max_pairs + 1)]) ** 2) / np.sum(np.abs(psi) ** 2))
    if guard > max_discard:
        raise ValueError(f"oracle truncation guard tripped: {guard:.3e}")
    psi[totals > 2 * max_pairs] = 0.0
    psi /= np.linalg.norm(psi)
    out = np.zeros(basis.dim, dtype=complex)
    positions = [basis.position(m) for m in local.modes]
    for idx, occ in enumerate(local.occs):
        if abs(psi[idx]) < 1e-300 or sum(occ) > basis.cutoff:
            continue
        target = [0] * len(basis.modes)
        for p, nph in zip(positions, occ):
            target[p] = nph
        out[basis.index[tuple(target)]] = psi[idx]
    return out


def run_scenario(config: SetupConfig, scenario: Scenario) -> OracleResult:
    """Dense re-computation of a scenario's conditional output and probability."""
    if any(config.efficiency(name) < 1.0 for name in ("p", "f1", "f2", "d1", "d2")):
        raise NotImplementedError("the oracle covers unit-efficiency detectors")
    b1h, b1v = beam_modes(1)
    b2h, b2v = beam_modes(2)
    b3h, b3v = beam_modes(3)
    b4h, b4v = beam_modes(4)
    dump = Mode("loss_prep", "H")
    # Deliberately different mode ordering from the main pipeline.
    modes: list[Mode] = [b3h, b3v, b4h, b4v, b2h, b2v, b1h, b1v, dump]
    stage_beams: list[str] = []
    if scenario.kind == "threefold_cascade_p" and scenario.stages > 1:
        stage_beams = [f"p_stage{t}" for t in range(2, scenario.stages + 1)]
        for b in stage_beams:
            modes.extend(beam_modes(b))
    basis = Basis(tuple(modes), config.cutoff)

    max_pairs = config.cutoff // 2
    psi_1 = _source_vector(basis, config.coupling_1, (1, 4), max_pairs, config.max_discard)
    psi_2 = _source_vector(basis, config.coupling_2, (2, 3), max_pairs, config.max_discard)
    # Product of the two emissions inside the joint cutoff, renormalized.
    psi = np.zeros(basis.dim, dtype=complex)
    nz1 = np.nonzero(np.abs(psi_1) > 1e-300)[0]
    nz2 = np.nonzero(np.abs(psi_2) > 1e-300)[0]
    for i1 in nz1:
        occ1 = basis.occs[i1]
        for i2 in nz2:
            occ2 = basis.occs[i2]
            joint = tuple(a + b for a, b in zip(occ1, occ2))
            if sum(joint) <= config.cutoff:
                psi[basis.index[joint]] += psi_1[i1] * psi_2[i2]
    psi /= np.linalg.norm(psi)

    if config.preparation == "polarizer_on_beam_1":
        pol_modes = (b1h, b1v)
        pol_angle = config.input_angle
    else:
        pol_modes = (b4h, b4v)
        pol_angle = config.input_angle + math.pi / 2
    psi = basis.apply_unitary(psi, _rotation(-pol_angle), pol_modes)
    psi = basis.apply_unitary(psi, _SWAP, (pol_modes[1], dump))
    psi = basis.apply_unitary(psi, _rotation(pol_angle), pol_modes)

    bs = _bs_matrix(0.5, config.bs_phase)
    psi = basis.apply_unitary(psi, bs, (b1h, b2h))
    psi = basis.apply_unitary(psi, bs, (b1v, b2v))

    if stage_beams:
        k = scenario.stages
        dft = np.exp(2j * math.pi * np.outer(np.arange(k), np.arange(k)) / k) / math.sqrt(k)
        for pol, lead in (("H", b4h), ("V", b4v)):
            group = (lead,) + tuple(Mode(b, pol) for b in stage_beams)
            psi = basis.apply_unitary(psi, dft, group)

    undo_analyzer: float | None = None
    if scenario.kind == "fourfold" and config.bob_analyzer_angle is not None:
        psi = basis.apply_unitary(psi, _rotation(-config.bob_analyzer_angle), (b3h, b3v))
        undo_analyzer = config.bob_analyzer_angle

    # Outcome classification of every basis state.
    occ = basis.occ_arr

    def count(group: Sequence[Mode]) -> np.ndarray:
        pos = [basis.position(m) for m in group]
        return occ[:, pos].sum(axis=1)

    if scenario.kind == "threefold_number_resolved_p":
        mask = count((b4h, b4v)) == scenario.photon_number
    elif stage_beams:
        groups = [(b4h, b4v)] + [beam_modes(b) for b in stage_beams]
        clicked = sum((count(grp) >= 1).astype(int) for grp in groups)
        mask = clicked == 1
    else:
        mask = count((b4h, b4v)) >= 1
    mask &= count((b1h, b1v)) >= 1
    mask &= count((b2h, b2v)) >= 1
    if scenario.kind == "fourfold":
        d_clicked = (count((b3h,)) >= 1).astype(int) + (count((b3v,)) >= 1).astype(int)
        mask &= d_clicked == 1
    elif scenario.kind == "threefold_qnd_bob":
        mask &= count((b3h, b3v)) == scenario.photon_number

    kept = np.where(mask, psi, 0.0)
    probability = float(np.vdot(kept, kept).real)
    if probability < 1e-14:
        raise ValueError("oracle: pattern has structurally zero probability")
    kept = kept / math.sqrt(probability)
    if undo_analyzer is not None:
        kept = basis.apply_unitary(kept, _rotation(undo_analyzer), (b3h, b3v))

    # Partial trace onto beam 3 by explicit grouping over the dense vector.
    p3 = [basis.position(b3h), basis.position(b3v)]
    rest = [p for p in range(len(basis.modes)) if p not in p3]
    rho3_occs = sorted(
        {(o[p3[0]], o[p3[1]]) for o in basis.occs}, key=lambda t: (sum(t), t)
    )
    sub_index = {o: i for i, o in enumerate(rho3_occs)}
    groups: dict[tuple[int, ...], list[tuple[int, complex]]] = {}
    for i in np.nonzero(np.abs(kept) > 1e-300)[0]:
        o = basis.occs[i]
        key = tuple(o[p] for p in rest)
        groups.setdefault(key, []).append((sub_index[(o[p3[0]], o[p3[1]])], kept[i]))
    rho3 = np.zeros((len(rho3_occs), len(rho3_occs)), dtype=complex)
    for entries in groups.values():
        for a_i, a_v in entries:
            for b_i, b_v in entries:
                rho3[a_i, b_i] += a_v * np.conj(b_v)

    phi = np.zeros(len(rho3_occs), dtype=complex)
    phi[sub_index[(1, 0)]] = math.cos(config.input_angle)
    phi[sub_index[(0, 1)]] = math.sin(config.input_angle)
    fidelity = float(np.real(phi.conj() @ rho3 @ phi))
    vacuum_weight = float(np.real(rho3[sub_index[(0, 0)], sub_index[(0, 0)]]))
    return OracleResult(
        probability=probability,
        fidelity=fidelity,
        vacuum_weight=vacuum_weight,
        rho3_occs=tuple(rho3_occs),
        rho3=rho3,
    )


def leading_order_fidelity(
    config: SetupConfig, scenario: Scenario, couplings: Sequence[float] | None = None
) -> float:
    """Zero-coupling fidelity from the oracle's own samples."""
    if couplings is None:
        couplings = coupling_ladder(config.coupling_1)
    couplings = tuple(couplings)
    ratio = config.coupling_2 / config.coupling_1
    values = []
    for g in couplings:
        cfg = replace(config, coupling_1=g, coupling_2=ratio * g)
        values.append(run_scenario(cfg, scenario).fidelity)
    return richardson(np.array([g**2 for g in couplings]), np.array(values)).value


def compare(result: ScenarioResult, reference: OracleResult) -> dict[str, float]:
    """Absolute deviations between a pipeline result and the oracle."""
    sub_index = {o: i for i, o in enumerate(reference.rho3_occs)}
    perm = [sub_index[occ] for occ in result.rho3.space.basis]
    rho_ref = reference.rho3[np.ix_(perm, perm)]
    return {
        "probability": abs(result.probability - reference.probability),
        "fidelity": abs(result.fidelity - reference.fidelity),
        "vacuum_weight": abs(result.vacuum_weight - reference.vacuum_weight),
        "rho3": float(np.max(np.abs(result.rho3.matrix - rho_ref))),
    }
