import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from telesim import fock
from telesim.fock import DensityOperator, FockSpace, Mode, beam_modes


def two_mode_space(cutoff=3):
    return FockSpace((Mode("a", "H"), Mode("a", "V")), cutoff)


def test_mode_validation():
    with pytest.raises(ValueError):
        Mode(1, "X")
    assert str(Mode(3, "H")) == "3H"


def test_space_rejects_duplicates():
    with pytest.raises(ValueError):
        FockSpace((Mode(1, "H"), Mode(1, "H")), 2)


def test_basis_is_lexicographic():
    space = two_mode_space(2)
    assert space.basis[:4] == ((0, 0), (0, 1), (0, 2), (1, 0))


def test_vacuum_is_unit_norm():
    space = two_mode_space()
    vac = fock.vacuum(space)
    assert vac.norm() == pytest.approx(1.0, abs=1e-15)


def test_single_photon_orthogonal_to_vacuum():
    space = two_mode_space()
    one = fock.basis_state(space, (1, 0))
    assert one.dot(fock.vacuum(space)) == 0


def test_basis_state_errors():
    space = two_mode_space(2)
    with pytest.raises(ValueError):
        fock.basis_state(space, (2, 1))  # exceeds cutoff
    with pytest.raises(ValueError):
        fock.basis_state(space, (1,))  # length mismatch
    with pytest.raises(ValueError):
        fock.basis_state(space, (-1, 0))


def test_tensor_of_vacua_is_vacuum():
    a = fock.vacuum(FockSpace((Mode(1, "H"),), 2))
    b = fock.vacuum(FockSpace((Mode(2, "H"),), 2))
    joint = fock.tensor(a, b)
    assert joint.amps == {joint.space.index_of((0, 0)): 1.0 + 0.0j}


def test_tensor_sets_both_occupations():
    a = fock.basis_state(FockSpace((Mode(1, "H"),), 2), (1,))
    b = fock.basis_state(FockSpace((Mode(2, "H"),), 2), (1,))
    joint = fock.tensor(a, b)
    assert list(joint.amps) == [joint.space.index_of((1, 1))]


def test_tensor_rejects_shared_modes():
    a = fock.vacuum(FockSpace((Mode(1, "H"),), 2))
    with pytest.raises(ValueError):
        fock.tensor(a, a)


def test_tensor_of_source_states_keeps_norm():
    # Norm computed directly on the product of two normalized emissions.
    from telesim import sources

    s1 = sources.spdc_state(
        sources.SpdcParams(0.1, 2, (1, 4)), FockSpace(beam_modes(1) + beam_modes(4), 4), 1e-4
    )
    s2 = sources.spdc_state(
        sources.SpdcParams(0.15, 2, (2, 3)), FockSpace(beam_modes(2) + beam_modes(3), 4), 1e-3
    )
    assert fock.tensor(s1, s2).norm() == pytest.approx(1.0, abs=1e-12)


def test_restrict_reports_discarded_weight():
    space = FockSpace((Mode(1, "H"),), 3)
    psi = fock.basis_state(space, (0,)).scaled(math.sqrt(0.75)).add(
        fock.basis_state(space, (3,)).scaled(math.sqrt(0.25))
    )
    target = FockSpace((Mode(1, "H"), Mode(2, "H")), 2)
    restricted, discarded = fock.restrict(psi, target)
    assert discarded == pytest.approx(0.25, abs=1e-12)
    assert restricted.norm() == pytest.approx(1.0, abs=1e-12)


def test_partial_trace_keep_all_is_identity():
    space = two_mode_space(2)
    psi = fock.basis_state(space, (1, 0)).scaled(0.6).add(fock.basis_state(space, (0, 1)).scaled(0.8))
    rho = fock.pure_density(psi)
    kept = fock.partial_trace(rho, space.modes)
    assert_allclose(kept.matrix, rho.matrix, atol=1e-14)


def test_partial_trace_of_product_state():
    sa = FockSpace((Mode(1, "H"), Mode(1, "V")), 2)
    sb = FockSpace((Mode(2, "H"),), 2)
    a = fock.basis_state(sa, (1, 0)).scaled(0.6).add(fock.basis_state(sa, (0, 1)).scaled(0.8))
    b = fock.basis_state(sb, (1,))
    joint = fock.tensor(a, b)
    reduced = fock.partial_trace(joint, sa.modes)
    expected = fock.pure_density(a).matrix
    # The traced space keeps the joint cutoff, so compare on the overlap block.
    sub = [reduced.space.index_of(occ) for occ in sa.basis]
    assert_allclose(reduced.matrix[np.ix_(sub, sub)], expected, atol=1e-14)


def test_partial_trace_of_singlet_is_maximally_mixed():
    # Brute-force oracle: form the 4-mode pure density and trace by explicit
    # loops over occupation tuples, then compare against the library.
    from telesim import sources

    space = FockSpace(beam_modes(1) + beam_modes(2), 2)
    singlet = sources.polarization_singlet(space, 1, 2)
    keep = beam_modes(1)
    kp = space.positions(keep)
    rest = [p for p in range(4) if p not in kp]
    target = space.subspace(keep)
    brute = np.zeros((target.dim, target.dim), dtype=complex)
    for i, ai in singlet.amps.items():
        for j, aj in singlet.amps.items():
            occ_i, occ_j = space.occupation_of(i), space.occupation_of(j)
            if all(occ_i[p] == occ_j[p] for p in rest):
                ki = target.index_of(tuple(occ_i[p] for p in kp))
                kj = target.index_of(tuple(occ_j[p] for p in kp))
                brute[ki, kj] += ai * np.conj(aj)
    reduced = fock.partial_trace(singlet, keep)
    assert_allclose(reduced.matrix, brute, atol=1e-14)
    eigenvalues = sorted((v for v, _ in fock.eigendecompose(reduced)), reverse=True)
    assert_allclose(eigenvalues[:2], [0.5, 0.5], atol=1e-12)


def test_apply_identity_leaves_state():
    space = two_mode_space(2)
    psi = fock.basis_state(space, (1, 1)).scaled(1.0)
    out = fock.apply_operator(np.eye(space.dim), psi)
    assert out.amps == psi.amps


def test_vacuum_projector_weights():
    space = FockSpace((Mode(1, "H"),), 1)
    proj = np.zeros((space.dim, space.dim))
    proj[space.index_of((0,)), space.index_of((0,))] = 1.0
    vac = fock.vacuum(space)
    assert fock.apply_operator(proj, vac).norm() == pytest.approx(1.0)
    plus = fock.basis_state(space, (0,)).scaled(1 / math.sqrt(2)).add(
        fock.basis_state(space, (1,)).scaled(1 / math.sqrt(2))
    )
    projected = fock.apply_operator(proj, plus)
    assert projected.norm() ** 2 == pytest.approx(0.5, abs=1e-12)


def test_fidelity_pure_self():
    space = two_mode_space(2)
    phi = fock.polarized_photon(space, "a", 0.4)
    assert fock.fidelity_pure(fock.pure_density(phi), phi) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_of_half_vacuum_mixture():
    space = two_mode_space(2)
    phi = fock.polarized_photon(space, "a", 0.7)
    rho = fock.mixture([(0.5, fock.vacuum(space)), (0.5, phi)])
    assert fock.fidelity_pure(rho, phi) == pytest.approx(0.5, abs=1e-12)


def test_fidelity_of_maximally_mixed_polarization():
    # 2x2 oracle: (<phi| (I/2) |phi>) = 1/2 for any single-photon polarization.
    space = two_mode_space(1)
    h = fock.basis_state(space, (1, 0))
    v = fock.basis_state(space, (0, 1))
    rho = fock.mixture([(0.5, h), (0.5, v)])
    direct = 0.5 * abs(math.cos(1.1)) ** 2 + 0.5 * abs(math.sin(1.1)) ** 2
    assert direct == pytest.approx(0.5)
    phi = fock.polarized_photon(space, "a", 1.1)
    assert fock.fidelity_pure(rho, phi) == pytest.approx(0.5, abs=1e-12)


def test_fidelity_rejects_unnormalized():
    space = two_mode_space(1)
    phi = fock.basis_state(space, (1, 0)).scaled(0.5)
    rho = fock.pure_density(fock.basis_state(space, (1, 0)))
    with pytest.raises(ValueError):
        fock.fidelity_pure(rho, phi)
    with pytest.raises(ValueError):
        fock.fidelity_pure(DensityOperator(space, rho.matrix * 0.3), fock.basis_state(space, (1, 0)))


def test_eigendecompose_pure_state():
    space = two_mode_space(2)
    rho = fock.pure_density(fock.polarized_photon(space, "a", 0.3))
    values = [v for v, _ in fock.eigendecompose(rho)]
    assert values[0] == pytest.approx(1.0, abs=1e-12)
    assert max(abs(v) for v in values[1:]) < 1e-12


def test_eigendecompose_balanced_mixture():
    space = two_mode_space(2)
    phi = fock.polarized_photon(space, "a", 0.9)
    rho = fock.mixture([(0.5, fock.vacuum(space)), (0.5, phi)])
    values = [v for v, _ in fock.eigendecompose(rho)]
    assert_allclose(values[:2], [0.5, 0.5], atol=1e-12)
    assert max(abs(v) for v in values[2:]) < 1e-12


def test_eigendecompose_reconstructs_random_hermitian():
    rng = np.random.default_rng(11)
    space = two_mode_space(2)
    g = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    rho = DensityOperator(space, fock.hermitize(g @ g.conj().T / np.trace(g @ g.conj().T).real))
    pairs = fock.eigendecompose(rho)
    rebuilt = sum(v * np.outer(s.to_dense(), s.to_dense().conj()) for v, s in pairs)
    assert np.max(np.abs(rebuilt - rho.matrix)) < 1e-10


def test_eigendecompose_rejects_non_hermitian():
    space = FockSpace((Mode(1, "H"),), 1)
    m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(ValueError):
        fock.eigendecompose(DensityOperator(space, m))


def test_hermitize_guards_large_drift():
    with pytest.raises(ValueError):
        fock.hermitize(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_listing_format():
    space = two_mode_space(1)
    psi = fock.basis_state(space, (1, 0))
    text = psi.listing()
    assert text.splitlines()[0] == "# modes: aH aV"
    assert "1 0" in text


@settings(max_examples=40, deadline=None)
@given(
    n_modes=st.integers(min_value=1, max_value=10),
    cutoff=st.integers(min_value=0, max_value=6),
    data=st.data(),
)
def test_basis_bijection(n_modes, cutoff, data):
    space = FockSpace(tuple(Mode(i, "H") for i in range(n_modes)), cutoff)
    index = data.draw(st.integers(min_value=0, max_value=space.dim - 1))
    assert space.index_of(space.occupation_of(index)) == index


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_partial_trace_preserves_trace(seed):
    rng = np.random.default_rng(seed)
    space = FockSpace((Mode(1, "H"), Mode(1, "V"), Mode(2, "H")), 3)
    g = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    m = g @ g.conj().T
    rho = DensityOperator(space, m / np.trace(m).real)
    reduced = fock.partial_trace(rho, beam_modes(1))
    assert abs(reduced.trace - rho.trace) <= 1e-12
    assert reduced.min_eigenvalue() >= -1e-10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31), alpha=st.floats(min_value=0.0, max_value=1.0))
def test_fidelity_is_linear_in_rho(seed, alpha):
    rng = np.random.default_rng(seed)
    space = two_mode_space(1)

    def random_density():
        g = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
        m = g @ g.conj().T
        return DensityOperator(space, m / np.trace(m).real)

    rho1, rho2 = random_density(), random_density()
    phi = fock.polarized_photon(space, "a", rng.uniform(0, math.pi))
    blended = DensityOperator(space, alpha * rho1.matrix + (1 - alpha) * rho2.matrix)
    lhs = fock.fidelity_pure(blended, phi)
    rhs = alpha * fock.fidelity_pure(rho1, phi) + (1 - alpha) * fock.fidelity_pure(rho2, phi)
    assert abs(lhs - rhs) <= 1e-12


def test_pruning_drops_tiny_amplitudes():
    space = two_mode_space(1)
    psi = fock.basis_state(space, (1, 0)).add(fock.basis_state(space, (0, 1)).scaled(1e-16))
    assert all(abs(a) > fock.PRUNE_THRESHOLD for a in psi.amps.values())


def test_density_operator_validate():
    space = two_mode_space(1)
    rho = fock.mixture([(0.5, fock.vacuum(space)), (0.5, fock.basis_state(space, (1, 0)))])
    rho.validate()
    bad = DensityOperator(space, np.diag([1.0, -0.5, 0.5]).astype(complex))
    with pytest.raises(ValueError, match="positive"):
        bad.validate()
