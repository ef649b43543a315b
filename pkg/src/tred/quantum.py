"""Superoperators, CPTP projector factorizations and positivity checks.

All superoperators use column-stacking vectorization:
``vec(A X B) = (B^T kron A) vec(X)``.
"""
from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np

from .exceptions import DimensionError, PositivityViolation
from .linalg import as_matrix, herm_eig, hs_norm
from .reduction import ProjectorFactorization, build_F_terms

__all__ = [
    "PAULI_X", "PAULI_Y", "PAULI_Z", "SIGMA_MINUS", "SIGMA_PLUS",
    "LindbladSpec",
    "check_density_matrix",
    "vec", "unvec",
    "hamiltonian_superop", "dissipator_superop", "liouvillian", "apply_superop",
    "partial_trace",
    "bipartite_factors", "diagonal_factors",
    "thermal_state",
    "reduced_hamiltonian",
    "hermitian_basis", "operator_schmidt",
    "CovarianceStructure", "second_order_structure",
    "structural_vs_recursive_F2",
    "choi_matrix", "CPTPVerdict", "is_cptp_map",
    "LindbladVerdict", "is_lindblad_type",
    "ClassicalVerdict", "classical_generator_checks", "classical_lindblad_embedding",
    "trace_norm", "positivity_exit_index", "positivity_exit_detector",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
# |0> is the +1 eigenvector of sigma_z; sigma_minus maps |0> -> |1>.
SIGMA_MINUS = 0.5 * (PAULI_X - 1j * PAULI_Y)
SIGMA_PLUS = 0.5 * (PAULI_X + 1j * PAULI_Y)

HERMITIAN_TOL = 1e-10
DENSITY_TOL = 1e-10
CHI_VIOLATION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LindbladSpec:
    """Hamiltonian plus noise operators of a GKLS generator (hbar = 1)."""

    hamiltonian: np.ndarray
    noise_ops: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        H = as_matrix(self.hamiltonian, "hamiltonian")
        if H.shape[0] != H.shape[1]:
            raise DimensionError(f"hamiltonian must be square, got {H.shape}")
        if hs_norm(H - H.conj().T) > HERMITIAN_TOL * max(1.0, hs_norm(H)):
            raise ValueError("hamiltonian is not Hermitian")
        ops = [as_matrix(L, "noise operator") for L in self.noise_ops]
        for L in ops:
            if L.shape != H.shape:
                raise DimensionError(f"noise operator shape {L.shape} != {H.shape}")
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "noise_ops", ops)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @property
    def is_hamiltonian(self):
        return all(hs_norm(L) == 0.0 for L in self.noise_ops)


def check_density_matrix(rho, tol=DENSITY_TOL):
    """Return ``rho`` as an array after validating it is a density matrix."""
    rho = as_matrix(rho, "rho")
    if hs_norm(rho - rho.conj().T) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix has trace {np.trace(rho).real:.12g}")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w[0] < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    return rho


def vec(x):
    """Column-stacking vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, d=None):
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
        if d * d != v.size:
            raise DimensionError(f"length {v.size} is not a perfect square")
    elif d * d != v.size:
        raise DimensionError(f"length {v.size} does not match dimension {d}")
    return v.reshape(d, d, order="F")


def hamiltonian_superop(H):
    """Matrix of rho -> -i[H, rho]."""
    H = as_matrix(H, "H")
    eye = np.eye(H.shape[0])
    return -1j * (np.kron(eye, H) - np.kron(H.T, eye))


def dissipator_superop(L):
    """Matrix of rho -> L rho L^dag - {L^dag L, rho}/2."""
    L = as_matrix(L, "L")
    eye = np.eye(L.shape[0])
    LdL = L.conj().T @ L
    return np.kron(L.conj(), L) - 0.5 * (np.kron(eye, LdL) + np.kron(LdL.T, eye))


def liouvillian(spec):
    out = hamiltonian_superop(spec.hamiltonian)
    for L in spec.noise_ops:
        out = out + dissipator_superop(L)
    return out


def apply_superop(S, X):
    """unvec(S vec(X))."""
    X = np.asarray(X)
    return unvec(S @ vec(X), X.shape[0])


def partial_trace(rho, d_s, d_b):
    """Trace out the second tensor factor of a (d_s d_b)-dimensional operator."""
    rho = np.asarray(rho)
    return np.einsum("acbc->ab", rho.reshape(d_s, d_b, d_s, d_b))


def bipartite_factors(d_s, d_b, tau, min_eig=1e-12):
    """Vectorized R = tr_B and J(mu) = mu kron tau.

    ``tau`` must be a bath density matrix with smallest eigenvalue above
    ``min_eig``; pass ``min_eig=None`` to accept rank-deficient references.
    """
    tau = check_density_matrix(tau)
    if tau.shape != (d_b, d_b):
        raise DimensionError(f"tau has shape {tau.shape}, expected {(d_b, d_b)}")
    w = np.linalg.eigvalsh(tau)
    if min_eig is not None and w[0] <= min_eig:
        raise ValueError(f"reference state is singular: min eigenvalue {w[0]:.3e}")
    ds2, d = d_s * d_s, d_s * d_b
    # vec index of |a,c><b,e| in the full space is (b*d_b + e)*d + a*d_b + c.
    a_, c_, b_, e_ = np.ix_(range(d_s), range(d_b), range(d_s), range(d_b))
    idx = (b_ * d_b + e_) * d + a_ * d_b + c_
    R = np.zeros((ds2, d * d))
    for a in range(d_s):
        for b in range(d_s):
            for c in range(d_b):
                R[b * d_s + a, idx[a, c, b, c]] = 1.0
    J = np.zeros((d * d, ds2), dtype=np.complex128)
    for a in range(d_s):
        for b in range(d_s):
            J[idx[a, :, b, :].reshape(-1), b * d_s + a] = tau.reshape(-1)
    return ProjectorFactorization(R.astype(np.complex128), J)


def diagonal_factors(d):
    """R extracts the diagonal of a d x d matrix; J embeds a vector as a diagonal."""
    if d < 1:
        raise ValueError("d must be >= 1")
    R = np.zeros((d, d * d), dtype=np.complex128)
    for j in range(d):
        R[j, j * d + j] = 1.0
    return ProjectorFactorization(R, R.T.copy())


def thermal_state(H_B, beta):
    """Gibbs state exp(-beta H_B) / tr exp(-beta H_B)."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    w, v = herm_eig(H_B)
    p = np.exp(-beta * (w - w[0]))
    p /= p.sum()
    rho = (v * p) @ v.conj().T
    return 0.5 * (rho + rho.conj().T)


def reduced_hamiltonian(H, tau):
    """tr_B[(1 kron tau) H]."""
    H = as_matrix(H, "H")
    tau = as_matrix(tau, "tau")
    d_b = tau.shape[0]
    d = H.shape[0]
    if d % d_b:
        raise DimensionError(f"dimension {d} is not divisible by bath dimension {d_b}")
    d_s = d // d_b
    H4 = H.reshape(d_s, d_b, d_s, d_b)
    return np.einsum("ec,acbe->ab", tau, H4)


def hermitian_basis(d):
    """Orthonormal (Hilbert-Schmidt) basis of d x d Hermitian matrices."""
    basis = []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=np.complex128)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=np.complex128)
            a[j, k], a[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis += [s, a]
    basis.append(np.eye(d, dtype=np.complex128) / np.sqrt(d))
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(np.complex128))
    return basis


def operator_schmidt(H, d_s, d_b, tol=1e-12):
    """Split a Hermitian bipartite H into sum_k S_k kron E_k with Hermitian factors.

    Expands H on a Hermitian system basis, then rotates both sides by the
    eigenvectors of the (real) Gram matrix of the bath factors so that the
    E_k are HS-orthogonal.  Terms with ||E_k|| below ``tol * ||H||`` are dropped.
    """
    H = as_matrix(H, "H")
    if H.shape != (d_s * d_b, d_s * d_b):
        raise DimensionError(f"H has shape {H.shape}, expected {(d_s * d_b,) * 2}")
    G = hermitian_basis(d_s)
    H4 = H.reshape(d_s, d_b, d_s, d_b)
    # E_a = tr_S[(G_a kron 1) H]; Hermitian since G_a and H are.
    E = [np.einsum("ba,acbe->ce", g, H4) for g in G]
    gram = np.array([[np.vdot(x, y).real for y in E] for x in E])
    w, W = np.linalg.eigh(gram)
    keep = np.sqrt(np.clip(w, 0, None)) > tol * max(hs_norm(H), 1e-300)
    S_out, E_out = [], []
    for k in np.flatnonzero(keep)[::-1]:
        s = sum(W[a, k] * G[a] for a in range(len(G)))
        e = sum(W[a, k] * E[a] for a in range(len(E)))
        S_out.append(0.5 * (s + s.conj().T))
        E_out.append(0.5 * (e + e.conj().T))
    return S_out, E_out


@dataclass(frozen=True, eq=False)
class CovarianceStructure:
    """Second-order term written through the bath covariance matrix chi.

    F_2(mu) = sum_jk chi_jk [2 S_j mu S_k - {S_k S_j, mu}]
            = sum_h rates_h D_{sqrt(2) L_h}(mu).
    """

    system_ops: List[np.ndarray]
    bath_ops: List[np.ndarray]
    means: np.ndarray
    chi: np.ndarray
    rates: np.ndarray
    lindblad_ops: List[np.ndarray]

    @property
    def superop(self):
        """Matrix of F_2 acting on vec(mu)."""
        d = self.system_ops[0].shape[0] if self.system_ops else 1
        out = np.zeros((d * d, d * d), dtype=np.complex128)
        for g, L in zip(self.rates, self.lindblad_ops):
            out += g * dissipator_superop(np.sqrt(2.0) * L)
        return out

    def superop_from_chi(self):
        """Same matrix assembled directly from chi (no diagonalization)."""
        d = self.system_ops[0].shape[0] if self.system_ops else 1
        eye = np.eye(d)
        out = np.zeros((d * d, d * d), dtype=np.complex128)
        for j, Sj in enumerate(self.system_ops):
            for k, Sk in enumerate(self.system_ops):
                SkSj = Sk @ Sj
                term = 2.0 * np.kron(Sk.T, Sj) - np.kron(eye, SkSj) - np.kron(SkSj.T, eye)
                out += self.chi[j, k] * term
        return out


def second_order_structure(H, tau, decomposition=None):
    """Covariance form of F_2 for purely Hamiltonian bipartite dynamics.

    ``decomposition`` may supply (S_list, E_list) with H = sum_k S_k kron E_k;
    otherwise :func:`operator_schmidt` is used.
    """
    H = as_matrix(H, "H")
    tau = as_matrix(tau, "tau")
    d_b = tau.shape[0]
    d_s = H.shape[0] // d_b
    if decomposition is None:
        S, E = operator_schmidt(H, d_s, d_b)
    else:
        S, E = (list(x) for x in decomposition)
    a = np.array([np.trace(tau @ e) for e in E])
    tauE = [tau @ e for e in E]
    c = np.array([[np.sum(ej.T * te) for te in tauE] for ej in E])  # tr(E_j tau E_k)
    chi = c - np.outer(a, a)
    chi = 0.5 * (chi + chi.conj().T)
    if not S:
        return CovarianceStructure([], [], a, chi, np.zeros(0), [])
    w, V = herm_eig(chi, tol=1e-8)
    if w[0] < -CHI_VIOLATION_TOL:
        raise PositivityViolation(f"covariance matrix has eigenvalue {w[0]:.3e}")
    L_ops = [sum(V[j, h] * S[j] for j in range(len(S))) for h in range(len(S))]
    return CovarianceStructure(S, E, a, chi, np.clip(w, 0.0, None), L_ops)


def structural_vs_recursive_F2(H, tau):
    """HS distance between F_2 from the recursion and from the covariance form."""
    H = as_matrix(H, "H")
    tau = as_matrix(tau, "tau")
    d_b = tau.shape[0]
    d_s = H.shape[0] // d_b
    proj = bipartite_factors(d_s, d_b, tau, min_eig=None)
    F2_rec = build_F_terms(hamiltonian_superop(H), proj, 1).term(2)
    F2_cov = second_order_structure(H, tau).superop_from_chi()
    return hs_norm(F2_rec - F2_cov)


def choi_matrix(S):
    """Choi matrix sum_ab |a><b| kron Phi(|a><b|) by index reshuffling."""
    S = as_matrix(S, "superoperator")
    d = int(round(np.sqrt(S.shape[0])))
    if d * d != S.shape[0] or S.shape[0] != S.shape[1]:
        raise DimensionError(f"superoperator shape {S.shape} is not d^2 x d^2")
    # S[r + d*c, a + d*b] = Phi(|a><b|)[r, c]  ->  C[(a, r), (b, c)]
    return S.reshape(d, d, d, d).transpose(3, 1, 2, 0).reshape(d * d, d * d)


class CPTPVerdict(NamedTuple):
    ok: bool
    min_choi_eig: float
    tp_residual: float


def is_cptp_map(Phi, tol=1e-9):
    Phi = as_matrix(Phi, "superoperator")
    d = int(round(np.sqrt(Phi.shape[0])))
    vid = vec(np.eye(d))
    tp = float(np.max(np.abs(vid @ Phi - vid)))
    C = choi_matrix(Phi)
    herm = float(np.max(np.abs(C - C.conj().T)))
    w = np.linalg.eigvalsh(0.5 * (C + C.conj().T))
    ok = tp <= tol and herm <= tol and w[0] >= -tol
    return CPTPVerdict(bool(ok), float(w[0]), tp)


class LindbladVerdict(NamedTuple):
    ok: bool
    hermiticity_residual: float
    trace_residual: float
    min_ccp_eig: float


def is_lindblad_type(G, tol=1e-9):
    """Hermiticity preservation, trace annihilation, conditional complete positivity."""
    G = as_matrix(G, "superoperator")
    d = int(round(np.sqrt(G.shape[0])))
    C = choi_matrix(G)
    herm = float(np.max(np.abs(C - C.conj().T)))
    vid = vec(np.eye(d))
    tr = float(np.max(np.abs(vid @ G)))
    omega = vid / np.sqrt(d)
    Pi = np.eye(d * d) - np.outer(omega, omega.conj())
    Ch = 0.5 * (C + C.conj().T)
    w = np.linalg.eigvalsh(Pi @ Ch @ Pi)
    ok = herm <= tol and tr <= tol and w[0] >= -tol
    return LindbladVerdict(bool(ok), herm, tr, float(w[0]))


class ClassicalVerdict(NamedTuple):
    ok: bool
    metzler: bool
    zero_column_sums: bool
    min_offdiag: float
    max_abs_column_sum: float


def classical_generator_checks(F, tol=1e-10):
    """Metzler (off-diagonals >= -tol) and zero column sums."""
    F = np.asarray(F)
    if np.iscomplexobj(F):
        if np.max(np.abs(F.imag), initial=0.0) > tol:
            raise ValueError("classical generator has non-negligible imaginary part")
        F = F.real
    off = F[~np.eye(F.shape[0], dtype=bool)]
    min_off = float(off.min()) if off.size else 0.0
    cols = float(np.max(np.abs(F.sum(axis=0))))
    metzler = min_off >= -tol
    zero_cols = cols <= tol
    return ClassicalVerdict(metzler and zero_cols, metzler, zero_cols, min_off, cols)


def classical_lindblad_embedding(F):
    """Superoperator rho -> J F R(rho) - kappa (rho - diag rho).

    With kappa = max(0, -min F_ii) this is of Lindblad type exactly when F
    is real, Metzler and has zero column sums, and R G J = F.
    """
    F = np.asarray(F, dtype=np.complex128)
    d = F.shape[0]
    proj = diagonal_factors(d)
    kappa = max(0.0, -float(np.min(F.real.diagonal())))
    G = proj.J @ F @ proj.R
    return G - kappa * (np.eye(d * d) - proj.P)


def trace_norm(X):
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(X), compute_uv=False)))


def positivity_exit_index(states, tol=1e-9):
    """Index of the first state that is not positive, or ``None``.

    Square states are checked through their smallest eigenvalue; vectors
    (probability distributions) through their smallest entry.
    """
    for i, x in enumerate(states):
        x = np.asarray(x)
        if x.ndim == 2 and x.shape[0] == x.shape[1]:
            low = np.linalg.eigvalsh(0.5 * (x + x.conj().T))[0]
        else:
            low = np.min(np.real(x))
        if low < -tol:
            return i
    return None


def positivity_exit_detector(traj, tol=1e-9):
    """Earliest time at which a trajectory leaves the set of states, or ``None``."""
    i = positivity_exit_index(traj.states, tol)
    return None if i is None else float(traj.times[i])
