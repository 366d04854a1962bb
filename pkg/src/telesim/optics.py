"""Linear-optical elements as unitaries on mode space, lifted to Fock space.

A ModeTransform is a small unitary U acting on creation operators by columns,
a†_i -> sum_j U[j, i] a†_j, so lifting is a homomorphism:
lift(U @ V) = lift(U) @ lift(V). Every lifted element conserves total photon
number and is unitary on the truncated space.

Declared beamsplitter convention (pinned by tests): the mode matrix is
[[sqrt(T), e^{i phi} sqrt(1-T)], [-e^{-i phi} sqrt(1-T), sqrt(T)]], so at
phi = 0 a photon entering the first port reflects with a minus sign:
|1,0> -> sqrt(T)|1,0> - sqrt(1-T)|0,1>. Physical results are independent of
phi (checked by a sweep test).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

import numpy as np

from .fock import FockOperator, FockSpace, Mode, StateVector

UNITARITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModeTransform:
    """A unitary on a handful of modes (mode space, not Fock space)."""

    modes: tuple[Mode, ...]
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        m = np.asarray(self.matrix, dtype=complex)
        k = len(self.modes)
        if m.shape != (k, k):
            raise ValueError(f"matrix shape {m.shape} does not match {k} modes")
        if len(set(self.modes)) != k:
            raise ValueError("duplicate modes in transform")
        defect = np.max(np.abs(m.conj().T @ m - np.eye(k)))
        if defect > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
        object.__setattr__(self, "matrix", m)


def beamsplitter(mode_a: Mode, mode_b: Mode, transmissivity: float, phase: float = 0.0) -> ModeTransform:
    """Two-port beamsplitter in the declared convention.

    `transmissivity` is the intensity transmission T in [0, 1]; `phase` is the
    convention phase on the reflected amplitudes.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {transmissivity}")
    t = math.sqrt(transmissivity)
    r = math.sqrt(1.0 - transmissivity)
    m = np.array(
        [
            [t, np.exp(1j * phase) * r],
            [-np.exp(-1j * phase) * r, t],
        ],
        dtype=complex,
    )
    return ModeTransform((mode_a, mode_b), m, label=f"bs({mode_a},{mode_b})")


def polarization_rotation(h: Mode, v: Mode, angle: float) -> ModeTransform:
    """Rotate polarization by `angle`: |H> -> cos|H> + sin|V>."""
    c, s = math.cos(angle), math.sin(angle)
    return ModeTransform((h, v), np.array([[c, -s], [s, c]], dtype=complex), label=f"rot({h.beam})")


def phase_shift(mode: Mode, angle: float) -> ModeTransform:
    return ModeTransform((mode,), np.array([[np.exp(1j * angle)]]), label=f"phase({mode})")


def waveplate(h: Mode, v: Mode, axis_angle: float, retardance: float) -> ModeTransform:
    """Waveplate with fast axis at `axis_angle`, retarding the slow axis by `retardance`."""
    c, s = math.cos(axis_angle), math.sin(axis_angle)
    rot = np.array([[c, -s], [s, c]])
    m = rot @ np.diag([1.0, np.exp(1j * retardance)]) @ rot.T
    return ModeTransform((h, v), m, label=f"wp({h.beam})")


def half_wave(h: Mode, v: Mode, axis_angle: float) -> ModeTransform:
    return waveplate(h, v, axis_angle, math.pi)


def quarter_wave(h: Mode, v: Mode, axis_angle: float) -> ModeTransform:
    return waveplate(h, v, axis_angle, math.pi / 2)


def pbs(beam_a: int | str, beam_b: int | str) -> ModeTransform:
    """Polarizing beamsplitter: transmits H, reflects V with phase i."""
    ah, av = Mode(beam_a, "H"), Mode(beam_a, "V")
    bh, bv = Mode(beam_b, "H"), Mode(beam_b, "V")
    m = np.zeros((4, 4), dtype=complex)
    order = (ah, av, bh, bv)
    idx = {mode: k for k, mode in enumerate(order)}
    m[idx[ah], idx[ah]] = 1.0
    m[idx[bh], idx[bh]] = 1.0
    m[idx[bv], idx[av]] = 1j
    m[idx[av], idx[bv]] = 1j
    return ModeTransform(order, m, label=f"pbs({beam_a},{beam_b})")


def polarizer(h: Mode, v: Mode, angle: float, loss: Mode) -> tuple[ModeTransform, ...]:
    """Lossy polarizer passing `angle`, routing the blocked component to `loss`.

    Realized unitarily (rotate so the pass axis is H, swap the blocked mode
    with the dedicated loss mode, rotate back) so the whole pipeline stays
    unitary until measurement; tracing out `loss` gives the standard lossy
    polarizer channel.
    """
    if loss in (h, v):
        raise ValueError("loss mode collides with the polarizer's beam")
    swap = ModeTransform((v, loss), np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex), label="dump")
    return (
        polarization_rotation(h, v, -angle),
        swap,
        polarization_rotation(h, v, angle),
    )


def _compositions(total: int, bins: int) -> list[tuple[int, ...]]:
    """All length-`bins` tuples of non-negative ints summing to `total`."""
    out = []
    for cuts in combinations_with_replacement(range(bins), total):
        comp = [0] * bins
        for c in cuts:
            comp[c] += 1
        out.append(tuple(comp))
    return out


_FACTS = [math.factorial(n) for n in range(40)]


@lru_cache(maxsize=None)
def _expand_occupation(mat_bytes: bytes, k: int, occ: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], complex], ...]:
    # Image of |occ> under a k-mode transform: expand prod_i (sum_j U[j,i] a†_j)^{n_i} |0>.
    u = np.frombuffer(mat_bytes, dtype=complex).reshape(k, k)
    terms: dict[tuple[int, ...], complex] = {(0,) * k: 1.0 + 0.0j}
    for i, n_i in enumerate(occ):
        if n_i == 0:
            continue
        splits = []
        for comp in _compositions(n_i, k):
            w = _FACTS[n_i]
            amp = 1.0 + 0.0j
            for j, c in enumerate(comp):
                w //= _FACTS[c]
                if c:
                    amp *= u[j, i] ** c
            splits.append((comp, w * amp))
        new_terms: dict[tuple[int, ...], complex] = {}
        for dest, coeff in terms.items():
            for comp, c_amp in splits:
                if abs(c_amp) < 1e-300:
                    continue
                key = tuple(d + e for d, e in zip(dest, comp))
                new_terms[key] = new_terms.get(key, 0.0) + coeff * c_amp
        terms = new_terms
    norm_in = math.sqrt(math.prod(_FACTS[n] for n in occ))
    out = []
    for dest, coeff in terms.items():
        amp = coeff * math.sqrt(math.prod(_FACTS[n] for n in dest)) / norm_in
        if abs(amp) > 1e-16:
            out.append((dest, amp))
    return tuple(out)


def apply_transform(state: StateVector, transform: ModeTransform) -> StateVector:
    """Apply a mode transform directly to a sparse state (no matrix built)."""
    space = state.space
    pos = space.positions(transform.modes)
    k = len(pos)
    mat_bytes = transform.matrix.tobytes()
    out: dict[int, complex] = {}
    for i, a in state.amps.items():
        occ = space.occupation_of(i)
        sub = tuple(occ[p] for p in pos)
        for sub_out, c in _expand_occupation(mat_bytes, k, sub):
            new = list(occ)
            for p, n in zip(pos, sub_out):
                new[p] = n
            j = space.index_of(tuple(new))
            out[j] = out.get(j, 0.0) + a * c
    return StateVector(space, out).pruned()


def apply_circuit(state: StateVector, transforms: Iterable[ModeTransform]) -> StateVector:
    for t in transforms:
        state = apply_transform(state, t)
    return state


def lift(transform: ModeTransform, space: FockSpace) -> FockOperator:
    """Second-quantize a mode transform onto the truncated Fock space.

    The result conserves total photon number exactly and is unitary on the
    truncated space.
    """
    space.positions(transform.modes)  # validate membership early

    def column_fn(i: int) -> dict[int, complex]:
        col = apply_transform(StateVector(space, {i: 1.0 + 0.0j}), transform)
        return dict(col.amps)

    return FockOperator(space, column_fn)


def compose(transforms: Sequence[ModeTransform], space: FockSpace) -> FockOperator:
    """Product of lifted elements, first element acting first."""
    transforms = list(transforms)
    if not transforms:
        return FockOperator.from_sparse(space, np.eye(space.dim))

    def column_fn(i: int) -> dict[int, complex]:
        col = apply_circuit(StateVector(space, {i: 1.0 + 0.0j}), transforms)
        return dict(col.amps)

    return FockOperator(space, column_fn)
