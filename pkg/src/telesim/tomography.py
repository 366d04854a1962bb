"""State tomography of the receiver beam: vacuum weight is observable.

The conditional output lives in the vacuum (+) one-photon sector of beam 3
(multiphoton weight is reported as leakage, not reconstructed). Three
polarization analyzer settings — H/V, diagonal, circular — each with a
no-click outcome form an informationally complete set for the photon-number
block-diagonal part of that sector: counting analyzers carry no phase
reference, so coherences between the vacuum and one-photon blocks are
unobservable (and the apparatus produces none).

Reconstruction is linear inversion followed by eigenvalue clipping and trace
renormalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .fock import DensityOperator

BASES = ("hv", "diagonal", "circular")
OUTCOMES = ("plus", "minus", "no_click")

# Analyzer kets in the (H, V) basis.
_ANALYZERS: dict[str, tuple[np.ndarray, np.ndarray]] = {
    "hv": (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)),
    "diagonal": (
        np.array([1.0, 1.0], dtype=complex) / math.sqrt(2),
        np.array([1.0, -1.0], dtype=complex) / math.sqrt(2),
    ),
    "circular": (
        np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2),
        np.array([1.0, -1.0j], dtype=complex) / math.sqrt(2),
    ),
}


@dataclass(frozen=True)
class TomographySetting:
    """One analyzer basis; `shots=None` means exact (infinite statistics)."""

    basis: str
    shots: int | None = None

    def __post_init__(self) -> None:
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}, got {self.basis!r}")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be positive")


def default_settings(shots: int | None = None) -> tuple[TomographySetting, ...]:
    return tuple(TomographySetting(b, shots) for b in BASES)


def sector_matrix(rho3: DensityOperator) -> tuple[np.ndarray, float]:
    """3x3 block of rho3 on span{|0>, |1_H>, |1_V>} plus the leakage weight.

    The block is renormalized to trace one so the outcome probabilities of
    every setting sum to one; `leakage` is the multiphoton weight excluded
    from reconstruction.
    """
    space = rho3.space
    if len(space.modes) != 2:
        raise ValueError("expected a two-mode (single beam) operator")
    idx = [space.index_of((0, 0)), space.index_of((1, 0)), space.index_of((0, 1))]
    block = rho3.matrix[np.ix_(idx, idx)].copy()
    weight = float(np.trace(block).real)
    leakage = rho3.trace - weight
    if weight <= 0.0:
        raise ValueError("state has no weight in the vacuum/one-photon sector")
    return block / weight, float(leakage)


def _setting_probabilities(block: np.ndarray, basis: str) -> dict[str, float]:
    plus, minus = _ANALYZERS[basis]
    one = block[1:, 1:]
    return {
        "plus": float(np.real(plus.conj() @ one @ plus)),
        "minus": float(np.real(minus.conj() @ one @ minus)),
        "no_click": float(np.real(block[0, 0])),
    }


def tomography_probabilities(
    rho3: DensityOperator, settings: Sequence[TomographySetting]
) -> dict[str, dict[str, float]]:
    """Exact Born probabilities per setting and outcome (sector-renormalized).

    Raises if the settings do not span an informationally complete set for the
    block-diagonal sector.
    """
    if not settings:
        raise ValueError("no tomography settings given")
    missing = set(BASES) - {s.basis for s in settings}
    if missing:
        raise ValueError(f"settings are not informationally complete; missing {sorted(missing)}")
    block, _ = sector_matrix(rho3)
    table = {}
    for s in settings:
        probs = _setting_probabilities(block, s.basis)
        total = sum(probs.values())
        if abs(total - 1.0) > 1e-12:
            raise AssertionError(f"setting {s.basis} probabilities sum to {total}")
        table[s.basis] = probs
    return table


def sample_counts(
    probabilities: Mapping[str, Mapping[str, float]], shots: int, seed: int
) -> dict[str, dict[str, int]]:
    """Multinomial counts per setting, reproducible by seed."""
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    counts: dict[str, dict[str, int]] = {}
    for basis in sorted(probabilities):
        p = np.array([probabilities[basis][o] for o in OUTCOMES], dtype=float)
        p = np.clip(p, 0.0, None)
        draw = rng.multinomial(shots, p / p.sum())
        counts[basis] = {o: int(c) for o, c in zip(OUTCOMES, draw)}
    return counts


@dataclass(frozen=True)
class ReconstructionResult:
    """Linear-inversion estimate on the vacuum (+) one-photon sector."""

    rho_hat: np.ndarray
    vacuum_weight_estimate: float
    shots_used: int
    fidelity_to_truth: float | None = None


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _design_matrix() -> tuple[np.ndarray, list[tuple[str, str]]]:
    # Row per (setting, outcome); columns are (p0, t, bx, by, bz) with the
    # one-photon block (t*I + bx*X + by*Y + bz*Z)/2.
    rows = []
    labels = []
    for basis in BASES:
        plus, minus = _ANALYZERS[basis]
        for name, ket in (("plus", plus), ("minus", minus)):
            coeffs = [0.0, 0.5]
            for axis in ("x", "y", "z"):
                coeffs.append(0.5 * float(np.real(ket.conj() @ _PAULI[axis] @ ket)))
            rows.append(coeffs)
            labels.append((basis, name))
        rows.append([1.0, 0.0, 0.0, 0.0, 0.0])
        labels.append((basis, "no_click"))
    return np.array(rows), labels


def reconstruct(
    data: Mapping[str, Mapping[str, float]] | Mapping[str, Mapping[str, int]],
    truth: DensityOperator | None = None,
) -> ReconstructionResult:
    """Invert tomography data to a physical sector state.

    `data` maps basis -> outcome -> probability or count; counts are converted
    to frequencies per setting. Linear least squares recovers the five
    block-diagonal parameters; the estimate is then projected to the positive
    semidefinite trace-one set by eigenvalue clipping and renormalization.
    """
    missing = set(BASES) - set(data)
    if missing:
        raise ValueError(f"tomography data incomplete; missing bases {sorted(missing)}")
    a, labels = _design_matrix()
    y = []
    shots_used = 0
    for basis, outcome in labels:
        table = data[basis]
        total = sum(table.values())
        if total <= 0:
            raise ValueError(f"setting {basis} has no data")
        value = table[outcome]
        if isinstance(value, (int, np.integer)):
            shots_used += int(value)
            y.append(value / total)
        else:
            y.append(float(value))
    x, *_ = np.linalg.lstsq(a, np.array(y), rcond=None)
    p0, t, bx, by, bz = x
    one = 0.5 * (t * np.eye(2) + bx * _PAULI["x"] + by * _PAULI["y"] + bz * _PAULI["z"])
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = p0
    rho[1:, 1:] = one
    vals, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    vals = np.clip(vals, 0.0, None)
    if vals.sum() <= 0.0:
        raise ValueError("reconstruction collapsed to the zero operator")
    rho_hat = (vecs * vals) @ vecs.conj().T
    rho_hat /= np.trace(rho_hat).real
    fidelity = None
    if truth is not None:
        block, _ = sector_matrix(truth)
        fidelity = float(uhlmann_fidelity(rho_hat, block))
    return ReconstructionResult(
        rho_hat=rho_hat,
        vacuum_weight_estimate=float(rho_hat[0, 0].real),
        shots_used=shots_used,
        fidelity_to_truth=fidelity,
    )


def uhlmann_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """(tr sqrt(sqrt(a) b sqrt(a)))^2 for density matrices."""
    sq = scipy.linalg.sqrtm(a)
    inner = scipy.linalg.sqrtm(sq @ b @ sq)
    return float(np.real(np.trace(inner)) ** 2)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    vals = np.linalg.eigvalsh(0.5 * ((a - b) + (a - b).conj().T))
    return float(0.5 * np.sum(np.abs(vals)))
