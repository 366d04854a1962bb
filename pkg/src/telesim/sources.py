"""Type-II downconversion source: polarization-entangled pair emission.

The two-beam state is generated by applying the exponential of the
rotationally invariant pair-creation generator

    K† = a†_{iH} a†_{jV} - a†_{iV} a†_{jH}

with dimensionless strength g to the vacuum, truncating at a maximum pair
number, and renormalizing. The pair-number amplitudes are outputs of this
construction, not inputs: the one-pair component is the polarization singlet
and every component is invariant under common polarization rotations of the
two beams.

Truncation policy: the expansion is generated one pair order beyond the
requested maximum so the discarded weight is known; generation fails if that
weight exceeds `max_discard` (default 1e-6).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .fock import FockSpace, StateVector, beam_modes

DEFAULT_MAX_DISCARD = 1e-6


class TruncationError(ValueError):
    """Raised when a truncation step would silently drop non-negligible weight."""


@dataclass(frozen=True)
class SpdcParams:
    """Source strength and truncation order for one beam pair."""

    coupling: float
    max_pairs: int
    beams: tuple[int | str, int | str]

    def __post_init__(self) -> None:
        if not 0.0 <= self.coupling < 1.0:
            raise ValueError(f"coupling must be in [0, 1), got {self.coupling}")
        if self.max_pairs < 0:
            raise ValueError("max_pairs must be non-negative")
        if self.beams[0] == self.beams[1]:
            raise ValueError("source beams must differ")


@dataclass(frozen=True)
class SpdcCoefficients:
    """Pair-number amplitudes A_0..A_max of the renormalized expansion."""

    amplitudes: np.ndarray
    discarded_weight: float

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=float)
        object.__setattr__(self, "amplitudes", a)
        if a[0] <= 0.0:
            raise ValueError("global phase convention requires A_0 > 0")
        if np.any(a < 0.0):
            raise ValueError("amplitudes must be non-negative under the phase convention")
        if np.sum(a**2) > 1.0 + 1e-12:
            raise ValueError("amplitudes exceed unit total weight")


def _local_space(params: SpdcParams, pairs: int) -> FockSpace:
    i, j = params.beams
    return FockSpace(beam_modes(i) + beam_modes(j), 2 * pairs)


def _apply_pair_creation(space: FockSpace, state: dict[int, complex]) -> dict[int, complex]:
    # K† = a†_iH a†_jV - a†_iV a†_jH on the 4-mode local space (iH, iV, jH, jV).
    out: dict[int, complex] = {}
    for idx, amp in state.items():
        a, b, c, d = space.occupation_of(idx)
        if a + b + c + d + 2 <= space.cutoff:
            up1 = space.index_of((a + 1, b, c, d + 1))
            out[up1] = out.get(up1, 0.0) + amp * math.sqrt((a + 1) * (d + 1))
            up2 = space.index_of((a, b + 1, c + 1, d))
            out[up2] = out.get(up2, 0.0) - amp * math.sqrt((b + 1) * (c + 1))
    return out


def _pair_terms(params: SpdcParams, orders: int) -> tuple[FockSpace, list[dict[int, complex]]]:
    """Normalized-by-n! terms (K†)^n |0> / n! for n = 0..orders."""
    space = _local_space(params, orders)
    term: dict[int, complex] = {space.index_of((0, 0, 0, 0)): 1.0 + 0.0j}
    terms = [term]
    for n in range(1, orders + 1):
        term = _apply_pair_creation(space, term)
        term = {i: a / n for i, a in term.items()}
        terms.append(term)
    return space, terms


def _term_norms(terms: list[dict[int, complex]]) -> np.ndarray:
    return np.array([math.sqrt(sum(abs(a) ** 2 for a in t.values())) for t in terms])


def spdc_coefficients(params: SpdcParams) -> SpdcCoefficients:
    """Pair-number amplitudes of the truncated, renormalized expansion.

    A_n is g^n times the norm of (K†)^n|0>/n!, renormalized over n <= max_pairs;
    all amplitudes are real and non-negative with A_0 > 0.
    """
    g = params.coupling
    m = params.max_pairs
    _, terms = _pair_terms(params, m + 1)
    norms = _term_norms(terms)
    weights = np.array([(g**n * norms[n]) ** 2 for n in range(m + 2)])
    kept = weights[: m + 1]
    discarded = float(weights[m + 1] / weights.sum())
    amps = np.sqrt(kept / kept.sum())
    return SpdcCoefficients(amplitudes=amps, discarded_weight=discarded)


def spdc_state(
    params: SpdcParams,
    space: FockSpace,
    max_discard: float = DEFAULT_MAX_DISCARD,
) -> StateVector:
    """Normalized two-beam source state embedded in `space`.

    Both polarizations of both source beams must exist in `space`, and the
    space cutoff must accommodate 2*max_pairs photons. Raises TruncationError
    if the pair order discarded by truncation carries more than `max_discard`
    of the squared norm.
    """
    i, j = params.beams
    space.positions(beam_modes(i) + beam_modes(j))
    if 2 * params.max_pairs > space.cutoff:
        raise ValueError(
            f"max_pairs {params.max_pairs} needs cutoff >= {2 * params.max_pairs}, space has {space.cutoff}"
        )
    g = params.coupling
    m = params.max_pairs
    local, terms = _pair_terms(params, m + 1)
    norms = _term_norms(terms)
    weights = np.array([(g**n * norms[n]) ** 2 for n in range(m + 2)])
    discarded = float(weights[m + 1] / weights.sum())
    if discarded > max_discard:
        raise TruncationError(
            f"truncation at {m} pairs discards weight {discarded:.3e} > {max_discard:.1e} at g={g}"
        )
    amps: dict[int, complex] = {}
    for n in range(m + 1):
        for idx, a in terms[n].items():
            amps[idx] = amps.get(idx, 0.0) + (g**n) * a
    psi = StateVector(local, amps).normalized()
    embedded, lost = fock.restrict(psi, space)
    if lost > 1e-15:
        raise TruncationError(f"embedding unexpectedly discarded weight {lost:.3e}")
    return embedded


def pair_component(params: SpdcParams, space: FockSpace, pairs: int) -> StateVector:
    """Normalized n-pair component of the source state (e.g. the singlet for n=1)."""
    if pairs > params.max_pairs:
        raise ValueError("requested component beyond max_pairs")
    local, terms = _pair_terms(params, pairs)
    comp = StateVector(local, terms[pairs]).normalized()
    embedded, _ = fock.restrict(comp, space)
    return embedded


def polarization_singlet(space: FockSpace, beam_i: int | str, beam_j: int | str) -> StateVector:
    """(|H_i V_j> - |V_i H_j>)/sqrt(2)."""
    ih, iv = beam_modes(beam_i)
    jh, jv = beam_modes(beam_j)
    occ_hv = [0] * len(space.modes)
    occ_vh = [0] * len(space.modes)
    p = space.positions((ih, iv, jh, jv))
    occ_hv[p[0]] = 1
    occ_hv[p[3]] = 1
    occ_vh[p[1]] = 1
    occ_vh[p[2]] = 1
    plus = fock.basis_state(space, occ_hv).scaled(1 / math.sqrt(2))
    minus = fock.basis_state(space, occ_vh).scaled(-1 / math.sqrt(2))
    return plus.add(minus)
