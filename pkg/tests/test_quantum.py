import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tred.exceptions import DimensionError
from tred.linalg import expm, hs_norm
from tred.models import (CentralSpinParams, SpinBosonParams, central_spin_hamiltonians,
                         spin_boson_fock_oracle, spin_boson_modes)
from tred.propagation import Trajectory
from tred.quantum import (PAULI_X, PAULI_Y, PAULI_Z, SIGMA_MINUS, LindbladSpec, apply_superop,
                          bipartite_factors, check_density_matrix, choi_matrix,
                          classical_generator_checks, classical_lindblad_embedding,
                          diagonal_factors, dissipator_superop, hamiltonian_superop,
                          hermitian_basis, is_cptp_map, is_lindblad_type, liouvillian,
                          operator_schmidt, partial_trace, positivity_exit_detector,
                          positivity_exit_index, reduced_hamiltonian, second_order_structure,
                          structural_vs_recursive_F2, thermal_state, trace_norm, unvec, vec)
from tred.reduction import build_F_terms

from conftest import random_complex, random_density, random_hermitian

KET0 = np.array([1.0, 0.0])
KET1 = np.array([0.0, 1.0])


def random_spec(rng, d, n_ops=2):
    return LindbladSpec(random_hermitian(rng, d),
                        [random_complex(rng, (d, d), 0.5) for _ in range(n_ops)])


# --- vectorization ----------------------------------------------------------

def test_vec_conventions(rng):
    np.testing.assert_array_equal(vec(np.eye(2)), [1, 0, 0, 1])
    X = random_complex(rng, (3, 3))
    np.testing.assert_array_equal(unvec(vec(X)), X)
    A, B, Y = (random_complex(rng, (2, 2)) for _ in range(3))
    np.testing.assert_allclose(vec(A @ Y @ B), np.kron(B.T, A) @ vec(Y), atol=1e-14)
    with pytest.raises(DimensionError):
        unvec(np.zeros(5))
    with pytest.raises(DimensionError):
        unvec(np.zeros(4), 3)


# --- Liouvillian ------------------------------------------------------------

def test_liouvillian_simple_cases():
    assert np.all(liouvillian(LindbladSpec(np.zeros((2, 2)))) == 0)
    S = liouvillian(LindbladSpec(PAULI_Z / 2))
    np.testing.assert_allclose(apply_superop(S, PAULI_X), PAULI_Y, atol=1e-15)
    # lowering operator |0><1| in the ket labelling where |1> is excited
    S = liouvillian(LindbladSpec(np.zeros((2, 2)), [np.outer(KET0, KET1)]))
    out = apply_superop(S, np.outer(KET1, KET1))
    np.testing.assert_allclose(out, np.outer(KET0, KET0) - np.outer(KET1, KET1), atol=1e-15)
    # SIGMA_MINUS lowers the +1 eigenvector of PAULI_Z (basis vector 0)
    S = liouvillian(LindbladSpec(np.zeros((2, 2)), [SIGMA_MINUS]))
    out = apply_superop(S, np.outer(KET0, KET0))
    np.testing.assert_allclose(out, np.outer(KET1, KET1) - np.outer(KET0, KET0), atol=1e-15)


def test_lindblad_spec_validation(rng):
    with pytest.raises(ValueError):
        LindbladSpec(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionError):
        LindbladSpec(np.eye(2), [np.eye(3)])
    assert LindbladSpec(np.eye(2)).is_hamiltonian
    assert not random_spec(rng, 2).is_hamiltonian


def test_liouvillian_matches_direct_formula(rng):
    spec = random_spec(rng, 3)
    S = liouvillian(spec)
    H = spec.hamiltonian
    for G in hermitian_basis(3):
        direct = -1j * (H @ G - G @ H)
        for L in spec.noise_ops:
            LdL = L.conj().T @ L
            direct += L @ G @ L.conj().T - 0.5 * (LdL @ G + G @ LdL)
        assert hs_norm(apply_superop(S, G) - direct) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 4))
def test_liouvillian_trace_and_adjoint_preservation(seed, d):
    rng = np.random.default_rng(seed)
    S = liouvillian(random_spec(rng, d))
    X = random_complex(rng, (d, d))
    Y = apply_superop(S, X)
    assert abs(np.trace(Y)) <= 1e-12 * max(1.0, hs_norm(S))
    assert hs_norm(apply_superop(S, X.conj().T) - Y.conj().T) <= 1e-12 * max(1.0, hs_norm(S))


# --- projector factorizations ----------------------------------------------

def test_bipartite_factors(rng):
    tau = random_density(rng, 3)
    proj = bipartite_factors(2, 3, tau)
    mu = random_density(rng, 2)
    np.testing.assert_allclose(proj.R @ vec(np.kron(mu, tau)), vec(mu), atol=1e-14)
    np.testing.assert_allclose(proj.J @ vec(mu), vec(np.kron(mu, tau)), atol=1e-14)
    np.testing.assert_allclose(proj.R @ proj.J, np.eye(4), atol=1e-14)
    rho = random_density(rng, 6)
    np.testing.assert_allclose(proj.R @ vec(rho), vec(partial_trace(rho, 2, 3)), atol=1e-14)


def test_bipartite_bell_marginal():
    phi = (np.kron(KET0, KET0) + np.kron(KET1, KET1)) / np.sqrt(2)
    proj = bipartite_factors(2, 2, np.eye(2) / 2)
    np.testing.assert_allclose(proj.R @ vec(np.outer(phi, phi)), vec(np.eye(2) / 2), atol=1e-15)


def test_bipartite_rejects_singular_reference():
    with pytest.raises(ValueError, match="singular"):
        bipartite_factors(2, 2, np.diag([1.0, 0.0]))
    proj = bipartite_factors(2, 2, np.diag([1.0, 0.0]), min_eig=None)
    np.testing.assert_allclose(proj.R @ proj.J, np.eye(4), atol=1e-15)


def test_diagonal_factors(rng):
    proj = diagonal_factors(3)
    np.testing.assert_array_equal(proj.J @ np.array([1, 0, 0]), vec(np.diag([1, 0, 0])))
    rho = random_density(rng, 3)
    p = proj.R @ vec(rho)
    np.testing.assert_allclose(p, np.diag(rho), atol=1e-15)
    assert np.sum(p).real == pytest.approx(1.0)
    F = proj.R @ liouvillian(random_spec(rng, 3)) @ proj.J
    assert np.max(np.abs(F.imag)) <= 1e-12
    with pytest.raises(ValueError):
        diagonal_factors(0)


# --- states -----------------------------------------------------------------

def test_thermal_state_cases(rng):
    np.testing.assert_allclose(thermal_state(random_hermitian(rng, 3), 0.0), np.eye(3) / 3,
                               atol=1e-15)
    H = random_hermitian(rng, 3)
    w, V = np.linalg.eigh(H)
    ground = np.outer(V[:, 0], V[:, 0].conj())
    np.testing.assert_allclose(thermal_state(H, 1e6), ground, atol=1e-10)
    e = np.e
    np.testing.assert_allclose(thermal_state(PAULI_Z, 1.0),
                               np.diag([1 / e, e]) / (1 / e + e), atol=1e-15)
    with pytest.raises(ValueError):
        thermal_state(PAULI_Z, -1.0)


def test_check_density_matrix():
    check_density_matrix(np.eye(2) / 2)
    for bad in (np.eye(2), np.diag([1.1, -0.1]), np.array([[0.5, 1], [0, 0.5]])):
        with pytest.raises(ValueError):
            check_density_matrix(bad)


def test_trace_norm(rng):
    H = random_hermitian(rng, 4)
    assert trace_norm(H) == pytest.approx(np.sum(np.abs(np.linalg.eigvalsh(H))))


# --- reduced Hamiltonian and second-order structure --------------------------

def test_reduced_hamiltonian_cases(rng):
    S = random_hermitian(rng, 2)
    tau = random_density(rng, 3)
    np.testing.assert_allclose(reduced_hamiltonian(np.kron(S, np.eye(3)), tau), S, atol=1e-14)
    E = np.diag([1.0, -1.0])
    np.testing.assert_allclose(reduced_hamiltonian(np.kron(PAULI_Z, E), np.eye(2) / 2), 0,
                               atol=1e-15)


def test_spin_boson_reduced_hamiltonian_is_shifted_system_hamiltonian():
    params = SpinBosonParams(n_modes=1)
    H, tau, _ = spin_boson_fock_oracle(params, cutoff=10)
    Hc = reduced_hamiltonian(H, tau)
    diff = Hc - 0.5 * params.g * PAULI_Z
    np.testing.assert_allclose(diff, diff[0, 0] * np.eye(2), atol=1e-12)


def test_operator_schmidt_reconstructs(rng):
    H = random_hermitian(rng, 6)
    S, E = operator_schmidt(H, 2, 3)
    rebuilt = sum(np.kron(s, e) for s, e in zip(S, E))
    assert hs_norm(rebuilt - H) <= 1e-12
    for s, e in zip(S, E):
        assert hs_norm(s - s.conj().T) <= 1e-14 and hs_norm(e - e.conj().T) <= 1e-14


def test_hermitian_basis_is_orthonormal():
    B = hermitian_basis(3)
    gram = np.array([[np.vdot(a, b) for b in B] for a in B])
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-15)


def test_zero_variance_gives_zero_second_order(rng):
    # tau is an eigenstate of every bath factor
    E1 = np.diag([1.0, 2.0])
    H = np.kron(random_hermitian(rng, 2), E1) + np.kron(random_hermitian(rng, 2), np.eye(2))
    tau = np.diag([1.0, 0.0])
    cs = second_order_structure(H, tau)
    assert np.max(np.abs(cs.chi)) <= 1e-14
    assert hs_norm(cs.superop) <= 1e-14


def test_spin_boson_covariance_entries():
    params = SpinBosonParams(n_modes=2)
    H, tau, dec = spin_boson_fock_oracle(params, cutoff=10)
    chi = second_order_structure(H, tau, dec).chi
    omega, lam = spin_boson_modes(params)
    assert abs(chi[1, 0]) <= 1e-8
    expected = np.sum(np.abs(lam) ** 2 / np.tanh(0.5 * params.beta * omega))
    assert chi[1, 1].real == pytest.approx(expected, rel=1e-6)


def test_covariance_superop_forms_agree(rng):
    H = random_hermitian(rng, 4)
    cs = second_order_structure(H, random_density(rng, 2))
    assert hs_norm(cs.superop - cs.superop_from_chi()) <= 1e-12
    assert np.min(cs.rates) >= 0


def test_structural_equality(rng):
    S = random_hermitian(rng, 2)
    tau = random_density(rng, 2)
    assert structural_vs_recursive_F2(np.kron(S, np.eye(2)), tau) <= 1e-14
    for _ in range(3):
        assert structural_vs_recursive_F2(random_hermitian(rng, 4), random_density(rng, 2)) <= 1e-10


def test_structural_equality_central_spin():
    H, _, H_B = central_spin_hamiltonians(CentralSpinParams())
    assert structural_vs_recursive_F2(H, thermal_state(H_B, 50.0)) <= 1e-10


def test_first_order_is_reduced_hamiltonian_commutator(rng):
    H = random_hermitian(rng, 6)
    tau = random_density(rng, 3)
    proj = bipartite_factors(2, 3, tau)
    F1 = build_F_terms(hamiltonian_superop(H), proj, 0).term(1)
    Hc = reduced_hamiltonian(H, tau)
    assert hs_norm(F1 - hamiltonian_superop(Hc)) <= 1e-10
    # the square of a Hamiltonian superoperator is a dissipator
    assert hs_norm(F1 @ F1 - dissipator_superop(np.sqrt(2) * Hc)) <= 1e-10


@pytest.mark.parametrize("family", ["bipartite", "diagonal"])
def test_low_orders_are_lindblad_type(rng, family):
    for _ in range(3):
        H = random_hermitian(rng, 4)
        if family == "bipartite":
            proj = bipartite_factors(2, 2, random_density(rng, 2))
        else:
            proj = diagonal_factors(4)
        gen = build_F_terms(hamiltonian_superop(H), proj, 1)
        if family == "diagonal":
            assert classical_generator_checks(gen.term(2)).ok
            assert hs_norm(gen.term(1)) <= 1e-14
        else:
            assert is_lindblad_type(gen.term(1)).ok
            assert is_lindblad_type(gen.term(2)).ok


# --- checkers ---------------------------------------------------------------

def test_choi_of_identity_is_maximally_entangled():
    omega = vec(np.eye(2))
    np.testing.assert_allclose(choi_matrix(np.eye(4)), np.outer(omega, omega), atol=1e-15)


def test_cptp_checker(rng):
    assert is_cptp_map(np.eye(4)).ok
    for _ in range(3):
        S = liouvillian(random_spec(rng, 2))
        for t in (0.1, 1.0, 3.0):
            assert is_cptp_map(expm(t * S)).ok
    transpose = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            transpose[b + 2 * a, a + 2 * b] = 1.0
    verdict = is_cptp_map(transpose)
    assert not verdict.ok
    assert verdict.min_choi_eig == pytest.approx(-1.0)
    assert verdict.tp_residual == 0.0


def test_lindblad_checker(rng):
    assert is_lindblad_type(liouvillian(random_spec(rng, 3))).ok
    bad = is_lindblad_type(-dissipator_superop(SIGMA_MINUS))
    assert not bad.ok and bad.min_ccp_eig < 0
    assert not is_lindblad_type(np.eye(4)).ok


def test_classical_checks():
    assert classical_generator_checks(np.array([[-1.0, 1.0], [1.0, -1.0]])).ok
    v = classical_generator_checks(np.array([[0.0, -1.0], [0.0, 1.0]]))
    assert not v.ok and not v.metzler
    with pytest.raises(ValueError):
        classical_generator_checks(np.array([[1j, 0], [0, 0]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 4), st.booleans())
def test_classical_embedding_equivalence(seed, d, metzler):
    rng = np.random.default_rng(seed)
    F = rng.uniform(0, 1, (d, d))
    if not metzler:
        F[0, 1] = -0.5
    np.fill_diagonal(F, 0.0)
    np.fill_diagonal(F, -F.sum(axis=0))
    assert classical_generator_checks(F).ok == metzler
    G = classical_lindblad_embedding(F)
    assert is_lindblad_type(G).ok == metzler
    proj = diagonal_factors(d)
    np.testing.assert_allclose(proj.R @ G @ proj.J, F, atol=1e-14)


def test_positivity_exit_detection(rng):
    S = liouvillian(random_spec(rng, 2))
    U = expm(0.1 * S)
    states = [np.eye(2) / 2]
    for _ in range(10):
        states.append(unvec(U @ vec(states[-1])))
    traj = Trajectory(np.arange(11) * 0.1, np.array(states))
    assert positivity_exit_detector(traj) is None
    bad = states[:4] + [np.diag([1.1, -0.1])] + states[5:]
    assert positivity_exit_index(bad) == 4
    assert positivity_exit_detector(Trajectory(traj.times, np.array(bad))) == pytest.approx(0.4)
    assert positivity_exit_index([np.array([0.5, 0.5]), np.array([1.2, -0.2])]) == 1
