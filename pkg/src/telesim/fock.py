"""Exact linear algebra on a truncated multimode bosonic Fock space.

States are sparse superpositions over occupation-number basis vectors of a
fixed set of labeled optical modes. Truncation is by *total* photon number:
the basis contains every occupation vector whose sum is at most the cutoff,
which bounds truncation error uniformly for pair-correlated sources. Basis
order is lexicographic over occupation vectors in declared mode order, so
serialized states and matrices are reproducible.

All values are immutable after construction; operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator

import numpy as np
import scipy.sparse

PRUNE_THRESHOLD = 1e-14
HERMITICITY_TOL = 1e-10
NORM_TOL = 1e-9

POLARIZATIONS = ("H", "V")


@dataclass(frozen=True)
class Mode:
    """One optical mode: a spatial beam in one polarization."""

    beam: int | str
    pol: str

    def __post_init__(self) -> None:
        if self.pol not in POLARIZATIONS:
            raise ValueError(f"polarization must be one of {POLARIZATIONS}, got {self.pol!r}")

    def __str__(self) -> str:
        return f"{self.beam}{self.pol}"


def beam_modes(beam: int | str) -> tuple[Mode, Mode]:
    """Both polarization modes of a beam, H first."""
    return Mode(beam, "H"), Mode(beam, "V")


def _occupations(n_modes: int, budget: int) -> Iterator[tuple[int, ...]]:
    # Lexicographic ascending; first declared mode is most significant.
    if n_modes == 0:
        yield ()
        return
    for k in range(budget + 1):
        for rest in _occupations(n_modes - 1, budget - k):
            yield (k,) + rest


@dataclass(frozen=True)
class FockSpace:
    """Ordered set of modes with a total-photon-number cutoff."""

    modes: tuple[Mode, ...]
    cutoff: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("duplicate modes in space")
        if not self.modes:
            raise ValueError("space needs at least one mode")
        if self.cutoff < 0:
            raise ValueError("cutoff must be non-negative")

    @cached_property
    def basis(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_occupations(len(self.modes), self.cutoff))

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {occ: i for i, occ in enumerate(self.basis)}

    @cached_property
    def totals(self) -> np.ndarray:
        """Total photon number of every basis state."""
        return np.array([sum(occ) for occ in self.basis], dtype=np.int64)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index_of(self, occupation: Iterable[int]) -> int:
        occ = tuple(occupation)
        try:
            return self._index[occ]
        except KeyError:
            raise ValueError(f"occupation {occ} not in basis (cutoff {self.cutoff})") from None

    def occupation_of(self, index: int) -> tuple[int, ...]:
        return self.basis[index]

    def positions(self, modes: Iterable[Mode]) -> tuple[int, ...]:
        """Positions of the given modes in declared order; errors on foreign modes."""
        pos = []
        for m in modes:
            try:
                pos.append(self.modes.index(m))
            except ValueError:
                raise ValueError(f"mode {m} not in space") from None
        return tuple(pos)

    def subspace(self, keep: Iterable[Mode], cutoff: int | None = None) -> "FockSpace":
        """Space over a subset of modes, preserving declared order."""
        keep_set = set(keep)
        unknown = keep_set - set(self.modes)
        if unknown:
            raise ValueError(f"modes not in space: {sorted(map(str, unknown))}")
        kept = tuple(m for m in self.modes if m in keep_set)
        return FockSpace(kept, self.cutoff if cutoff is None else cutoff)


@dataclass(frozen=True)
class StateVector:
    """Sparse ket over a FockSpace: basis index -> complex amplitude."""

    space: FockSpace
    amps: dict[int, complex]

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps.values()))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < 1e-300:
            raise ValueError("cannot normalize a zero state")
        return StateVector(self.space, {i: a / n for i, a in self.amps.items()})

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def dot(self, other: "StateVector") -> complex:
        """Inner product <self|other>."""
        if self.space != other.space:
            raise ValueError("states live on different spaces")
        acc = 0.0 + 0.0j
        for i, a in self.amps.items():
            b = other.amps.get(i)
            if b is not None:
                acc += a.conjugate() * b
        return acc

    def scaled(self, factor: complex) -> "StateVector":
        return StateVector(self.space, {i: factor * a for i, a in self.amps.items()})

    def add(self, other: "StateVector") -> "StateVector":
        if self.space != other.space:
            raise ValueError("states live on different spaces")
        out = dict(self.amps)
        for i, a in other.amps.items():
            out[i] = out.get(i, 0.0) + a
        return StateVector(self.space, out).pruned()

    def pruned(self, threshold: float = PRUNE_THRESHOLD) -> "StateVector":
        return StateVector(self.space, {i: a for i, a in self.amps.items() if abs(a) > threshold})

    def to_dense(self) -> np.ndarray:
        v = np.zeros(self.space.dim, dtype=complex)
        for i, a in self.amps.items():
            v[i] = a
        return v

    def listing(self) -> str:
        """Plain-text occupation/amplitude listing (debug serialization).

        One line per stored basis state: space-separated occupations in mode
        order, then the amplitude as `re<sign>im j`, sorted by basis index.
        """
        header = "# modes: " + " ".join(str(m) for m in self.space.modes)
        lines = [header]
        for i in sorted(self.amps):
            occ = self.space.occupation_of(i)
            a = self.amps[i]
            lines.append(" ".join(str(n) for n in occ) + f"  {a.real:+.12e}{a.imag:+.12e}j")
        return "\n".join(lines)


def vacuum(space: FockSpace) -> StateVector:
    return StateVector(space, {space.index_of((0,) * len(space.modes)): 1.0 + 0.0j})


def basis_state(space: FockSpace, occupations: Iterable[int]) -> StateVector:
    """Unit-norm occupation-number basis state.

    Raises ValueError if the occupation list does not match the mode count, has
    negative entries, or exceeds the total cutoff.
    """
    occ = tuple(occupations)
    if len(occ) != len(space.modes):
        raise ValueError(f"expected {len(space.modes)} occupations, got {len(occ)}")
    if any(n < 0 for n in occ):
        raise ValueError("occupations must be non-negative")
    if sum(occ) > space.cutoff:
        raise ValueError(f"total occupation {sum(occ)} exceeds cutoff {space.cutoff}")
    return StateVector(space, {space.index_of(occ): 1.0 + 0.0j})


def single_photon(space: FockSpace, mode: Mode) -> StateVector:
    occ = [0] * len(space.modes)
    occ[space.positions((mode,))[0]] = 1
    return basis_state(space, occ)


def polarized_photon(space: FockSpace, beam: int | str, angle: float) -> StateVector:
    """One photon in a beam, linearly polarized at `angle` from H."""
    h, v = beam_modes(beam)
    return single_photon(space, h).scaled(math.cos(angle)).add(
        single_photon(space, v).scaled(math.sin(angle))
    )


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Product state on the union space (cutoff adds, so no weight is lost)."""
    if set(a.space.modes) & set(b.space.modes):
        raise ValueError("tensor factors share modes")
    space = FockSpace(a.space.modes + b.space.modes, a.space.cutoff + b.space.cutoff)
    amps: dict[int, complex] = {}
    for i, ai in a.amps.items():
        occ_a = a.space.occupation_of(i)
        for j, bj in b.amps.items():
            amps[space.index_of(occ_a + b.space.occupation_of(j))] = ai * bj
    return StateVector(space, amps).pruned()


def restrict(state: StateVector, target: FockSpace) -> tuple[StateVector, float]:
    """Re-express a state on a target space, truncating to its cutoff.

    Modes absent from the source are taken as vacuum; every source mode must
    exist in the target. The kept part is rescaled back to the input norm.

    Returns:
        (restricted state, discarded fraction of squared norm).
    """
    src_pos = target.positions(state.space.modes)
    n_target = len(target.modes)
    kept: dict[int, complex] = {}
    kept_sq = 0.0
    total_sq = 0.0
    for i, a in state.amps.items():
        occ_src = state.space.occupation_of(i)
        total_sq += abs(a) ** 2
        if sum(occ_src) > target.cutoff:
            continue
        occ = [0] * n_target
        for p, n in zip(src_pos, occ_src):
            occ[p] = n
        kept[target.index_of(tuple(occ))] = a
        kept_sq += abs(a) ** 2
    if total_sq == 0.0:
        raise ValueError("cannot restrict a zero state")
    discarded = 1.0 - kept_sq / total_sq
    if kept_sq == 0.0:
        raise ValueError("restriction discarded the whole state")
    scale = math.sqrt(total_sq / kept_sq)
    return StateVector(target, {i: scale * a for i, a in kept.items()}).pruned(), discarded


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian operator on a FockSpace, stored dense.

    Density operators only ever materialize on small traced-out subspaces in
    this package, so a dense array is the right representation. The trace is
    1 for normalized operators and the event weight for subnormalized ones.
    """

    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"matrix shape {m.shape} does not match space dim {self.space.dim}")
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(hermitize(self.matrix)).min())

    def normalized(self) -> tuple["DensityOperator", float]:
        """Trace-one operator plus the weight that was divided out."""
        w = self.trace
        if w <= 0.0:
            raise ValueError("cannot normalize an operator with non-positive trace")
        return DensityOperator(self.space, self.matrix / w), w

    def validate(self, herm_tol: float = 1e-12, psd_tol: float = -1e-10) -> None:
        """Check Hermiticity and positivity at the library's stated tolerances."""
        defect = self.hermiticity_defect()
        if defect > herm_tol:
            raise ValueError(f"operator is not Hermitian (defect {defect:.3e})")
        lo = self.min_eigenvalue()
        if lo < psd_tol:
            raise ValueError(f"operator is not positive semidefinite (min eigenvalue {lo:.3e})")

    def listing(self) -> str:
        """Plain-text entry listing: row occupation | col occupation | value."""
        header = "# modes: " + " ".join(str(m) for m in self.space.modes)
        lines = [header]
        rows, cols = np.nonzero(np.abs(self.matrix) > PRUNE_THRESHOLD)
        for r, c in zip(rows, cols):
            ro = " ".join(str(n) for n in self.space.occupation_of(int(r)))
            co = " ".join(str(n) for n in self.space.occupation_of(int(c)))
            v = self.matrix[r, c]
            lines.append(f"{ro} | {co}  {v.real:+.12e}{v.imag:+.12e}j")
        return "\n".join(lines)


def hermitize(matrix: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Symmetrize (M + M†)/2, asserting the correction stays below `tol`.

    The bound keeps numerical drift in check without hiding logic errors: a
    genuinely non-Hermitian input raises instead of being silently repaired.
    """
    sym = 0.5 * (matrix + matrix.conj().T)
    drift = float(np.max(np.abs(matrix - sym))) if matrix.size else 0.0
    if drift > tol:
        raise ValueError(f"hermiticity drift {drift:.3e} exceeds {tol:.1e}")
    return sym


def pure_density(state: StateVector) -> DensityOperator:
    v = state.to_dense()
    return DensityOperator(state.space, np.outer(v, v.conj()))


def mixture(parts: Iterable[tuple[float, StateVector]]) -> DensityOperator:
    """Statistical mixture sum_k w_k |psi_k><psi_k| (weights not renormalized)."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty mixture")
    space = parts[0][1].space
    m = np.zeros((space.dim, space.dim), dtype=complex)
    for w, psi in parts:
        if psi.space != space:
            raise ValueError("mixture components live on different spaces")
        v = psi.to_dense()
        m += w * np.outer(v, v.conj())
    return DensityOperator(space, m)


def partial_trace(state: StateVector | DensityOperator, keep: Iterable[Mode]) -> DensityOperator:
    """Trace out every mode not in `keep`; the result keeps the full cutoff.

    Exactly trace preserving: the kept operator's trace equals the input trace
    (squared norm for kets) up to float rounding.
    """
    keep = tuple(keep)
    if isinstance(state, StateVector):
        space = state.space
    else:
        space = state.space
    target = space.subspace(keep)
    kp = space.positions(target.modes)
    rest_p = tuple(p for p in range(len(space.modes)) if p not in kp)

    def split(i: int) -> tuple[int, tuple[int, ...]]:
        occ = space.occupation_of(i)
        return target.index_of(tuple(occ[p] for p in kp)), tuple(occ[p] for p in rest_p)

    m = np.zeros((target.dim, target.dim), dtype=complex)
    if isinstance(state, StateVector):
        groups: dict[tuple[int, ...], list[tuple[int, complex]]] = {}
        for i, a in state.amps.items():
            k, r = split(i)
            groups.setdefault(r, []).append((k, a))
        for entries in groups.values():
            for k1, a1 in entries:
                for k2, a2 in entries:
                    m[k1, k2] += a1 * a2.conjugate()
    else:
        groups2: dict[tuple[int, ...], list[int]] = {}
        keep_idx = np.empty(space.dim, dtype=np.int64)
        for i in range(space.dim):
            k, r = split(i)
            keep_idx[i] = k
            groups2.setdefault(r, []).append(i)
        for idx in groups2.values():
            ia = np.asarray(idx)
            ka = keep_idx[ia]
            m[np.ix_(ka, ka)] += state.matrix[np.ix_(ia, ia)]
    return DensityOperator(target, hermitize(m))


def apply_operator(op, target: StateVector | DensityOperator):
    """Apply an operator: kets get O|psi>, density operators get O rho O†.

    `op` may be a FockOperator or a dense/sparse matrix on the target's space.
    Non-unitary operators leave kets/operators subnormalized; callers decide
    when to renormalize.
    """
    if isinstance(op, FockOperator):
        if op.space != target.space:
            raise ValueError("operator and state live on different spaces")
        if isinstance(target, StateVector):
            return op.apply(target)
        mat = op.to_sparse()
        out = mat @ target.matrix @ mat.conj().T
        return DensityOperator(target.space, np.asarray(out))
    mat = op
    if isinstance(target, StateVector):
        dim = target.space.dim
        if mat.shape != (dim, dim):
            raise ValueError("operator shape does not match space")
        v = mat @ target.to_dense()
        return StateVector(target.space, {i: v[i] for i in np.nonzero(np.abs(v) > PRUNE_THRESHOLD)[0]})
    if mat.shape != (target.space.dim, target.space.dim):
        raise ValueError("operator shape does not match space")
    return DensityOperator(target.space, mat @ target.matrix @ np.conj(mat).T)


def fidelity_pure(rho: DensityOperator, phi: StateVector) -> float:
    """Overlap <phi| rho |phi> for a normalized target ket and trace-one rho."""
    if rho.space != phi.space:
        raise ValueError("operator and state live on different spaces")
    if abs(phi.norm() - 1.0) > NORM_TOL:
        raise ValueError("target state is not normalized")
    if abs(rho.trace - 1.0) > NORM_TOL:
        raise ValueError("density operator is not trace normalized")
    v = phi.to_dense()
    val = complex(v.conj() @ rho.matrix @ v)
    if abs(val.imag) > 1e-12:
        raise ValueError(f"fidelity has imaginary residue {val.imag:.3e}")
    if not -1e-10 <= val.real <= 1.0 + 1e-10:
        raise ValueError(f"fidelity {val.real} outside [0, 1]")
    return min(max(val.real, 0.0), 1.0)


def eigendecompose(rho: DensityOperator) -> list[tuple[float, StateVector]]:
    """Eigenpairs sorted by descending eigenvalue; reconstruction is exact to eigh."""
    if rho.hermiticity_defect() > HERMITICITY_TOL:
        raise ValueError("eigendecompose requires a Hermitian operator")
    vals, vecs = np.linalg.eigh(hermitize(rho.matrix))
    order = np.argsort(vals)[::-1]
    out = []
    for k in order:
        v = vecs[:, k]
        amps = {int(i): complex(v[i]) for i in np.nonzero(np.abs(v) > PRUNE_THRESHOLD)[0]}
        out.append((float(vals[k]), StateVector(rho.space, amps)))
    return out


class FockOperator:
    """Linear operator on a FockSpace, built lazily column by column.

    Columns are produced by a callback mapping a basis index to a sparse
    column (dict basis index -> amplitude); to_sparse() materializes the full
    CSR matrix for structural tests.
    """

    def __init__(self, space: FockSpace, column_fn: Callable[[int], dict[int, complex]]):
        self.space = space
        self._column_fn = column_fn
        self._cols: dict[int, dict[int, complex]] = {}
        self._sparse: scipy.sparse.csr_matrix | None = None

    def column(self, i: int) -> dict[int, complex]:
        col = self._cols.get(i)
        if col is None:
            col = self._column_fn(i)
            self._cols[i] = col
        return col

    def apply(self, state: StateVector) -> StateVector:
        if state.space != self.space:
            raise ValueError("operator and state live on different spaces")
        out: dict[int, complex] = {}
        for i, a in state.amps.items():
            for j, c in self.column(i).items():
                out[j] = out.get(j, 0.0) + a * c
        return StateVector(self.space, out).pruned()

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        if self._sparse is None:
            rows, cols, vals = [], [], []
            for i in range(self.space.dim):
                for j, c in self.column(i).items():
                    rows.append(j)
                    cols.append(i)
                    vals.append(c)
            self._sparse = scipy.sparse.csr_matrix(
                (vals, (rows, cols)), shape=(self.space.dim, self.space.dim), dtype=complex
            )
        return self._sparse

    @classmethod
    def from_sparse(cls, space: FockSpace, matrix) -> "FockOperator":
        csc = scipy.sparse.csc_matrix(matrix)

        def column_fn(i: int) -> dict[int, complex]:
            sl = csc[:, i].tocoo()
            return {int(r): complex(v) for r, v in zip(sl.row, sl.data)}

        op = cls(space, column_fn)
        op._sparse = csc.tocsr()
        return op

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        if self.space != other.space:
            raise ValueError("operators live on different spaces")
        return FockOperator.from_sparse(self.space, self.to_sparse() @ other.to_sparse())

    def dagger(self) -> "FockOperator":
        return FockOperator.from_sparse(self.space, self.to_sparse().conj().T)
