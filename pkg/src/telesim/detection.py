"""Detector semantics as POVMs, and conditioning of states on click patterns.

Detectors watch a fixed set of modes. Threshold detectors distinguish only
"no photon" from "one or more"; number-resolving detectors project onto the
total photon number; cascades split the watched beam evenly across k
threshold stages and count clicks. Sub-unit efficiency is a binomial loss
channel (each photon seen independently with probability eta), equivalent to
a transmissivity-eta beamsplitter to a dedicated loss mode before an ideal
detector.

Conditioning in the main pipeline is projective: with unit-efficiency
detectors every outcome constraint is a predicate on occupation numbers of
the post-circuit state, applied as a union-subspace projector. Probabilities
below 1e-14 are reported as structurally zero rather than numerical noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from . import fock, optics
from .fock import DensityOperator, FockSpace, Mode, StateVector

STRUCTURAL_ZERO = 1e-14

DetectorKind = Literal["threshold", "number_resolving", "cascade"]


class ZeroProbabilityError(ValueError):
    """A requested outcome pattern has structurally zero probability."""


@dataclass(frozen=True)
class DetectorModel:
    """One detector: kind, watched modes, efficiency, cascade stage count."""

    name: str
    kind: DetectorKind
    modes: tuple[Mode, ...]
    efficiency: float = 1.0
    stages: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.kind not in ("threshold", "number_resolving", "cascade"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if not self.modes or len(set(self.modes)) != len(self.modes):
            raise ValueError("watched modes must be non-empty and unique")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must be in [0, 1]")
        if self.stages < 1:
            raise ValueError("cascade needs at least one stage")

    def outcome_labels(self, cutoff: int) -> tuple[str, ...]:
        if self.kind == "threshold":
            return ("no_click", "click")
        if self.kind == "number_resolving":
            return tuple(f"n={k}" for k in range(cutoff + 1))
        return tuple(f"clicks={c}" for c in range(self.stages + 1))


@dataclass(frozen=True)
class PovmElement:
    """One measurement outcome: a positive operator on the watched-mode space."""

    label: str
    space: FockSpace
    operator: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(fock.hermitize(self.operator)).min())


def _thinned_click_weights(space: FockSpace, efficiency: float) -> np.ndarray:
    """Diagonal of the no-click operator: (1-eta)^n per basis total n."""
    return (1.0 - efficiency) ** space.totals.astype(float)


def _cascade_elements(detector: DetectorModel, cutoff: int) -> list[PovmElement]:
    # Split each watched mode 1/sqrt(k) across k stage copies (k-port DFT),
    # apply per-stage thresholds with efficiency, take the vacuum-ancilla block.
    k = detector.stages
    watched = FockSpace(detector.modes, cutoff)
    stage_modes: list[tuple[Mode, ...]] = [detector.modes]
    all_modes = list(detector.modes)
    for t in range(2, k + 1):
        copies = tuple(Mode(f"{detector.name}.stage{t}.{i}", m.pol) for i, m in enumerate(detector.modes))
        stage_modes.append(copies)
        all_modes.extend(copies)
    big = FockSpace(tuple(all_modes), cutoff)
    dft = np.exp(2j * math.pi * np.outer(np.arange(k), np.arange(k)) / k) / math.sqrt(k)
    transforms = []
    for i in range(len(detector.modes)):
        group = tuple(stage_modes[t][i] for t in range(k))
        transforms.append(optics.ModeTransform(group, dft, label=f"split({detector.name})"))

    stage_positions = [big.positions(stage_modes[t]) for t in range(k)]
    eta = detector.efficiency

    split_images: list[StateVector] = []
    for w_occ in watched.basis:
        occ = [0] * len(big.modes)
        for p, n in zip(big.positions(detector.modes), w_occ):
            occ[p] = n
        split_images.append(optics.apply_circuit(fock.basis_state(big, occ), transforms))

    elements = []
    for c in range(k + 1):
        mat = np.zeros((watched.dim, watched.dim), dtype=complex)
        # Diagonal outcome weights in the post-split basis: product over stages
        # of click/no-click probabilities given that stage's photon count.
        diag = np.zeros(big.dim)
        for idx, occ in enumerate(big.basis):
            # Probability that exactly c stages click, given per-stage counts.
            probs = np.zeros(k + 1)
            probs[0] = 1.0
            for pos in stage_positions:
                q = (1.0 - eta) ** sum(occ[p] for p in pos)
                nxt = np.zeros(k + 1)
                nxt[: k + 1] += probs * q
                nxt[1:] += probs[:-1] * (1.0 - q)
                probs = nxt
            diag[idx] = probs[c]
        for a in range(watched.dim):
            va = split_images[a].to_dense()
            for b in range(a, watched.dim):
                vb = split_images[b].to_dense()
                val = complex(np.sum(va.conj() * diag * vb))
                mat[a, b] = val
                mat[b, a] = val.conjugate()
        elements.append(PovmElement(f"clicks={c}", watched, mat))
    return elements


def povm(detector: DetectorModel, cutoff: int) -> list[PovmElement]:
    """Full outcome set of a detector on its watched modes at the given cutoff.

    The returned operators are positive and sum to the identity within 1e-10.
    """
    space = FockSpace(detector.modes, cutoff)
    eta = detector.efficiency
    if detector.kind == "threshold":
        no_click = np.diag(_thinned_click_weights(space, eta))
        return [
            PovmElement("no_click", space, no_click),
            PovmElement("click", space, np.eye(space.dim) - no_click),
        ]
    if detector.kind == "number_resolving":
        totals = space.totals
        elements = []
        for k in range(cutoff + 1):
            diag = np.zeros(space.dim)
            for i, n in enumerate(totals):
                if n >= k:
                    diag[i] = math.comb(int(n), k) * eta**k * (1.0 - eta) ** (int(n) - k)
            elements.append(PovmElement(f"n={k}", space, np.diag(diag)))
        return elements
    return _cascade_elements(detector, cutoff)


@dataclass(frozen=True)
class Requirement:
    """A constraint on photon counts of mode groups in the post-circuit state.

    kinds:
        all_click  - every group holds at least one photon
        total_eq   - the summed count over all groups equals `value`
        clicked_eq - exactly `value` groups hold at least one photon
    """

    groups: tuple[tuple[Mode, ...], ...]
    kind: Literal["all_click", "total_eq", "clicked_eq"]
    value: int = 0
    label: str = ""

    def mask(self, space: FockSpace) -> np.ndarray:
        """Boolean basis mask of the union subspace satisfying the requirement."""
        counts = []
        occ = np.array(space.basis)
        for group in self.groups:
            pos = list(space.positions(group))
            counts.append(occ[:, pos].sum(axis=1))
        counts_arr = np.stack(counts)
        if self.kind == "all_click":
            return (counts_arr >= 1).all(axis=0)
        if self.kind == "total_eq":
            return counts_arr.sum(axis=0) == self.value
        if self.kind == "clicked_eq":
            return (counts_arr >= 1).sum(axis=0) == self.value
        raise ValueError(f"unknown requirement kind {self.kind!r}")

    def accepts(self, space: FockSpace, occ: tuple[int, ...]) -> bool:
        counts = [sum(occ[p] for p in space.positions(group)) for group in self.groups]
        if self.kind == "all_click":
            return all(c >= 1 for c in counts)
        if self.kind == "total_eq":
            return sum(counts) == self.value
        if self.kind == "clicked_eq":
            return sum(c >= 1 for c in counts) == self.value
        raise ValueError(f"unknown requirement kind {self.kind!r}")


def click(name: str, modes: Sequence[Mode]) -> Requirement:
    return Requirement(((tuple(modes)),), "all_click", label=f"{name}:click")


def total_count(name: str, modes: Sequence[Mode], n: int) -> Requirement:
    return Requirement(((tuple(modes)),), "total_eq", value=n, label=f"{name}:n={n}")


def exactly_one_clicked(name: str, groups: Sequence[Sequence[Mode]]) -> Requirement:
    return Requirement(tuple(tuple(g) for g in groups), "clicked_eq", value=1, label=f"{name}:one_click")


def condition_vector(
    state: StateVector, requirements: Iterable[Requirement]
) -> tuple[StateVector, float]:
    """Project a pure state onto the subspace satisfying every requirement.

    Returns the *normalized* conditional state and the pattern probability
    (squared norm of the projected component). Raises ZeroProbabilityError
    when the probability is structurally zero (< 1e-14).

    Requirements on disjoint mode groups commute, so the result is order
    independent. Applying the constraints as one union-subspace projector
    keeps coherence within the accepted subspace; for detectors whose modes
    are traced out afterwards this is identical to summing over recorded
    outcomes.
    """
    requirements = list(requirements)
    space = state.space
    norm_in_sq = sum(abs(a) ** 2 for a in state.amps.values())
    kept: dict[int, complex] = {}
    pre = [(tuple(tuple(space.positions(g)) for g in r.groups), r.kind, r.value) for r in requirements]
    for i, a in state.amps.items():
        occ = space.occupation_of(i)
        ok = True
        for groups_pos, kind, value in pre:
            counts = [sum(occ[p] for p in pos) for pos in groups_pos]
            if kind == "all_click":
                ok = all(c >= 1 for c in counts)
            elif kind == "total_eq":
                ok = sum(counts) == value
            else:
                ok = sum(c >= 1 for c in counts) == value
            if not ok:
                break
        if ok:
            kept[i] = a
    prob = sum(abs(a) ** 2 for a in kept.values()) / norm_in_sq
    if prob < STRUCTURAL_ZERO:
        labels = ", ".join(r.label or r.kind for r in requirements)
        raise ZeroProbabilityError(f"pattern [{labels}] has structurally zero probability")
    scale = 1.0 / math.sqrt(prob * norm_in_sq)
    return StateVector(space, {i: a * scale for i, a in kept.items()}), prob


def _embed_kraus(small: np.ndarray, small_space: FockSpace, space: FockSpace) -> np.ndarray:
    """Extend an operator on watched modes by the identity on the rest."""
    pos = space.positions(small_space.modes)
    rest = [p for p in range(len(space.modes)) if p not in pos]
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for j, occ in enumerate(space.basis):
        w_occ = tuple(occ[p] for p in pos)
        r_occ = tuple(occ[p] for p in rest)
        wj = small_space.index_of(w_occ)
        col = small[:, wj]
        for wi in np.nonzero(np.abs(col) > 1e-16)[0]:
            target = list(occ)
            for p, n in zip(pos, small_space.occupation_of(int(wi))):
                target[p] = n
            if sum(target) <= space.cutoff:
                out[space.index_of(tuple(target)), j] = col[wi]
    return out


def condition(
    state: DensityOperator | StateVector,
    pattern: dict[str, str],
    detectors: Sequence[DetectorModel],
    keep: Sequence[Mode],
) -> tuple[DensityOperator, float]:
    """Condition a state on a named outcome pattern and trace to `keep` modes.

    Detectors absent from `pattern` are summed over (their outcome operators
    add to the identity, so they are simply traced out). Watched mode sets
    must be disjoint. This general route applies Kraus operators sqrt(E) on
    the full space and suits the moderate spaces used in analysis and tests;
    the experiment pipeline uses `condition_vector` instead.
    """
    by_name = {d.name: d for d in detectors}
    unknown = set(pattern) - set(by_name)
    if unknown:
        raise ValueError(f"pattern names unknown detectors: {sorted(unknown)}")
    seen: set[Mode] = set()
    for d in detectors:
        if seen & set(d.modes):
            raise ValueError("detectors watch overlapping modes")
        seen |= set(d.modes)
    rho = fock.pure_density(state) if isinstance(state, StateVector) else state
    space = rho.space
    mat = rho.matrix
    for name, label in pattern.items():
        det = by_name[name]
        elements = {e.label: e for e in povm(det, space.cutoff)}
        if label not in elements:
            raise ValueError(f"detector {name!r} has no outcome {label!r}")
        el = elements[label]
        vals, vecs = np.linalg.eigh(fock.hermitize(el.operator))
        vals = np.clip(vals, 0.0, None)
        kraus_small = (vecs * np.sqrt(vals)) @ vecs.conj().T
        kraus = _embed_kraus(kraus_small, el.space, space)
        mat = kraus @ mat @ kraus.conj().T
    prob = float(np.trace(mat).real)
    if prob < STRUCTURAL_ZERO:
        raise ZeroProbabilityError(f"pattern {pattern} has structurally zero probability")
    reduced = fock.partial_trace(DensityOperator(space, fock.hermitize(mat)), keep)
    normalized, _ = reduced.normalized()
    return normalized, prob


def qnd_total_number(
    state: StateVector | DensityOperator, beam: int | str, n: int
) -> tuple[StateVector | DensityOperator, float]:
    """Project onto total photon number `n` in a beam without consuming it.

    The beam's modes survive the projection (non-demolition); the result is
    renormalized and returned with the projection probability. Polarization
    independent by construction: the projector commutes with any polarization
    rotation of the beam.
    """
    modes = fock.beam_modes(beam)
    req = total_count(f"qnd({beam})", modes, n)
    if isinstance(state, StateVector):
        out, prob = condition_vector(state, [req])
        return out, prob
    mask = req.mask(state.space).astype(float)
    proj = mask[:, None] * state.matrix * mask[None, :]
    prob = float(np.trace(proj).real) / max(state.trace, 1e-300)
    if prob < STRUCTURAL_ZERO:
        raise ZeroProbabilityError(f"no weight with {n} photons in beam {beam}")
    normalized, _ = DensityOperator(state.space, fock.hermitize(proj)).normalized()
    return normalized, prob
