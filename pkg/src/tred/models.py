"""Model builders: linear testbed, dephasing spin-boson, central spin, Ising chain.

Defaults are the reference parameter values of each model.
Tensor factor 0 (leftmost) is always the system / first spin.
"""
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .linalg import op_norm
from .propagation import Trajectory
from .quantum import (PAULI_X, PAULI_Y, PAULI_Z, SIGMA_MINUS, LindbladSpec,
                      bipartite_factors, diagonal_factors, dissipator_superop,
                      hamiltonian_superop, thermal_state, vec)
from .reduction import ProjectorFactorization

__all__ = [
    "linear_testbed",
    "SpinBosonParams", "spin_boson_modes", "spin_boson_rates", "SpinBosonRHS",
    "spin_boson_rhs", "simulate_spin_boson", "spin_boson_fock_oracle",
    "CentralSpinParams", "central_spin_model", "central_spin_hamiltonians",
    "IsingParams", "ising_hamiltonian", "ising_chain_model",
    "site_operator",
]


def linear_testbed(n=20, m=4, seed=0):
    """Random simply-stable generator with ||L||_op = 1/2 and coordinate projector.

    A has i.i.d. U[0, 1] entries; B = A - |lambda_max(A)| I; L = B / (2 ||B||_op).
    R = [I_m | 0] and J = R^T.
    """
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.0, 1.0, size=(n, n))
    lam_max = np.max(np.abs(np.linalg.eigvals(A)))
    B = A - lam_max * np.eye(n)
    L = (0.5 * B / op_norm(B)).astype(np.complex128)
    R = np.hstack([np.eye(m), np.zeros((m, n - m))]).astype(np.complex128)
    return L, ProjectorFactorization(R, R.T.copy())


# ---------------------------------------------------------------------------
# dephasing spin-boson
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpinBosonParams:
    g: float = 1.8
    omega_c: float = 0.2
    Lambda: float = 0.5
    s: float = 1.0
    beta: float = 10.0
    n_modes: int = 100
    tau_cg: Optional[float] = None   # defaults to 32 / omega_c

    def __post_init__(self):
        for name in ("g", "omega_c", "Lambda", "s", "beta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.tau_cg is not None and not self.tau_cg > 0:
            raise ValueError("tau_cg must be positive")

    @property
    def coarse_graining_time(self):
        return 32.0 / self.omega_c if self.tau_cg is None else self.tau_cg


def spin_boson_modes(params):
    """Frequencies k / N_B (k = 1..N_B) and couplings sqrt(J(omega_k))."""
    omega = np.arange(1, params.n_modes + 1) / params.n_modes
    if np.any(omega == 0):
        raise ValueError("zero frequency mode: alpha_k is singular")
    spectral = (params.Lambda * params.omega_c ** (1 - params.s) * omega ** params.s
                * np.exp(-omega / params.omega_c))
    return omega, np.sqrt(spectral)


class SpinBosonRates(NamedTuple):
    alpha: np.ndarray          # 2 |lambda_k|^2 / omega_k^2 coth(beta omega_k / 2)
    phi_recursion: float       # sum_k 2 |lambda_k|^2 coth(beta omega_k / 2)
    phi_occupation: float      # sum_k 2 |lambda_k|^2 / (exp(beta omega_k) - 1)
    gamma_cg: float            # sum_k alpha_k (1 - cos omega_k tau) / tau


def spin_boson_rates(params):
    omega, lam = spin_boson_modes(params)
    lam2 = np.abs(lam) ** 2
    coth = 1.0 / np.tanh(0.5 * params.beta * omega)
    alpha = 2.0 * lam2 / omega ** 2 * coth
    tau = params.coarse_graining_time
    return SpinBosonRates(
        alpha=alpha,
        phi_recursion=float(np.sum(2.0 * lam2 * coth)),
        phi_occupation=float(np.sum(2.0 * lam2 / np.expm1(params.beta * omega))),
        gamma_cg=float(np.sum(alpha * (1.0 - np.cos(omega * tau))) / tau),
    )


class SpinBosonRHS(NamedTuple):
    """Right-hand sides f(t, rho) of the three 2x2 dephasing equations."""

    exact: object
    second_order: object
    coarse_grained: object
    xi: object                 # exact time-dependent dephasing rate
    second_order_rate: float   # slope of the second-order rate phi * t
    gamma_cg: float


def _dephasing_rhs(H_S, rate):
    def rhs(t, rho):
        r = rate(t)
        return (-1j * (H_S @ rho - rho @ H_S)
                + r * (PAULI_Z @ rho @ PAULI_Z - rho))
    return rhs


def spin_boson_rhs(params, phi="recursion"):
    """Exact, second-order and coarse-grained dephasing equations.

    ``phi="recursion"`` uses the second-order coefficient produced by the
    reduction recursion, sum_k 2|lambda_k|^2 coth(beta omega_k / 2) (equal to
    xi'(0)); ``phi="occupation"`` uses sum_k 2|lambda_k|^2 / (exp(beta omega_k) - 1),
    which drops the vacuum contribution <b b^dag> - <b^dag b> = 1.
    """
    omega, _ = spin_boson_modes(params)
    rates = spin_boson_rates(params)
    if phi == "recursion":
        phi_val = rates.phi_recursion
    elif phi == "occupation":
        phi_val = rates.phi_occupation
    else:
        phi_val = float(phi)
    H_S = 0.5 * params.g * PAULI_Z
    aw = rates.alpha * omega

    def xi(t):
        return float(np.dot(aw, np.sin(omega * t)))

    return SpinBosonRHS(
        exact=_dephasing_rhs(H_S, xi),
        second_order=_dephasing_rhs(H_S, lambda t: phi_val * t),
        coarse_grained=_dephasing_rhs(H_S, lambda t: rates.gamma_cg),
        xi=xi,
        second_order_rate=phi_val,
        gamma_cg=rates.gamma_cg,
    )


def simulate_spin_boson(params, t_max, steps, rho0=None, phi="recursion"):
    """RK4 trajectories (exact, second order, coarse grained) of the qubit.

    Returns a dict of :class:`~tred.propagation.Trajectory` with 2x2 states.
    """
    if rho0 is None:
        plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
        rho0 = np.outer(plus, plus).astype(np.complex128)
    rhs = spin_boson_rhs(params, phi)
    omega, _ = spin_boson_modes(params)
    rates = spin_boson_rates(params)
    H_S = 0.5 * params.g * PAULI_Z
    A = hamiltonian_superop(H_S)
    B = dissipator_superop(PAULI_Z)
    dt = t_max / steps
    half_grid = np.arange(2 * steps + 1) * (0.5 * dt)
    rate_samples = {
        "exact": np.sin(np.outer(half_grid, omega)) @ (rates.alpha * omega),
        "second_order": rhs.second_order_rate * half_grid,
        "coarse_grained": np.full(half_grid.shape, rates.gamma_cg),
    }
    times = np.linspace(0.0, t_max, steps + 1)
    x0 = vec(rho0).reshape(4, 1)
    out = {}
    for name, r in rate_samples.items():
        states = _kernels.rk4_rate(A, B, r, x0, dt, steps)
        out[name] = Trajectory(times, states[:, :, 0].reshape(-1, 2, 2).transpose(0, 2, 1))
    return out


def _annihilation(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(np.complex128)


def spin_boson_fock_oracle(params, cutoff=20):
    """Fock-truncated spin-boson Hamiltonian, bath thermal state and the
    decomposition H = 1 kron E_0 + sigma_z kron E_1 used for the covariance.

    Mode frequencies and couplings follow :func:`spin_boson_modes`; keep
    ``params.n_modes`` small (the bath dimension is cutoff**n_modes).
    """
    if cutoff < 5:
        raise ValueError("cutoff must be >= 5")
    omega, lam = spin_boson_modes(params)
    nm = params.n_modes
    b = _annihilation(cutoff)
    eye_c = np.eye(cutoff)
    d_b = cutoff ** nm

    def mode_op(op, k):
        return reduce(np.kron, [op if j == k else eye_c for j in range(nm)])

    H_B = np.zeros((d_b, d_b), dtype=np.complex128)
    X = np.zeros((d_b, d_b), dtype=np.complex128)
    for k in range(nm):
        bk = mode_op(b, k)
        H_B += omega[k] * (bk.conj().T @ bk + 0.5 * np.eye(d_b))
        X += lam[k] * bk + np.conj(lam[k]) * bk.conj().T
    E0 = H_B
    E1 = 0.5 * params.g * np.eye(d_b) + X
    I2 = np.eye(2, dtype=np.complex128)
    H = np.kron(I2, E0) + np.kron(PAULI_Z, E1)
    tau = thermal_state(H_B, params.beta)
    return H, tau, ([I2, PAULI_Z], [E0, E1])


# ---------------------------------------------------------------------------
# spin chains
# ---------------------------------------------------------------------------

def site_operator(op, site, n_sites):
    """``op`` acting on ``site`` (0-based, leftmost factor first) of ``n_sites`` qubits."""
    eye = np.eye(2, dtype=np.complex128)
    return reduce(np.kron, [op if j == site else eye for j in range(n_sites)])


@dataclass(frozen=True)
class CentralSpinParams:
    n_bath: int = 3
    delta: float = 0.3
    lam: float = 0.1
    gamma: float = 1.0
    a_x: float = 1.2
    a_y: float = 1.5
    a_z: float = 1.3
    beta: float = 50.0
    Lambda_diss: float = 0.0

    def __post_init__(self):
        if self.n_bath < 1:
            raise ValueError("n_bath must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


def central_spin_hamiltonians(params):
    """(H_total, H_S, H_B) on 2^(n_bath+1) dimensions, bath H_B on 2^n_bath."""
    nb = params.n_bath
    n = nb + 1
    sx = [site_operator(PAULI_X, j, n) for j in range(n)]
    sy = [site_operator(PAULI_Y, j, n) for j in range(n)]
    sz = [site_operator(PAULI_Z, j, n) for j in range(n)]
    Jx, Jy, Jz = (0.5 * sum(s[1:]) for s in (sx, sy, sz))
    dim = 2 ** n
    H_S = params.delta * (sx[0] + sz[0])
    H_B_full = 0.25 * params.gamma * (2 * Jx @ Jx - 0.5 * nb * np.eye(dim))
    H_int = 0.5 * params.lam * (params.a_x * sx[0] @ Jx + params.a_y * sy[0] @ Jy
                                + params.a_z * sz[0] @ Jz)
    # bath-only copy of H_B on 2^nb dimensions
    bx = [site_operator(PAULI_X, j, nb) for j in range(nb)]
    Jx_b = 0.5 * sum(bx)
    H_B = 0.25 * params.gamma * (2 * Jx_b @ Jx_b - 0.5 * nb * np.eye(2 ** nb))
    return H_S + H_B_full + H_int, H_S, H_B


def central_spin_model(params):
    """Liouvillian spec, partial-trace factorization with thermal bath, rho_0.

    rho_0 = |+><+| kron tau, tau the bath Gibbs state at inverse temperature beta.
    """
    nb = params.n_bath
    H, _, H_B = central_spin_hamiltonians(params)
    noise = []
    if params.Lambda_diss != 0.0:
        noise = [params.Lambda_diss * site_operator(SIGMA_MINUS, k, nb + 1)
                 for k in range(1, nb + 1)]
    spec = LindbladSpec(H, noise)
    tau = thermal_state(H_B, params.beta)
    # At beta = 50 tau has eigenvalues near 1e-23, which round to either sign.
    # R J = I holds regardless, so the rank check is skipped.
    proj = bipartite_factors(2, 2 ** nb, tau, min_eig=None)
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    rho0 = np.kron(np.outer(plus, plus), tau)
    return spec, proj, rho0


@dataclass(frozen=True)
class IsingParams:
    n_spins: int = 4
    h: float = 0.36
    A: float = 0.3

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError("n_spins must be >= 2")


def ising_hamiltonian(params):
    n = params.n_spins
    H = sum(params.h * site_operator(PAULI_Z, j, n) for j in range(n))
    for j in range(n - 1):
        H = H + params.A * site_operator(PAULI_X, j, n) @ site_operator(PAULI_X, j + 1, n)
    return H


def ising_chain_model(params):
    """Liouvillian spec, diagonal factorization and p_0 = e_0."""
    H = ising_hamiltonian(params)
    d = 2 ** params.n_spins
    p0 = np.zeros(d)
    p0[0] = 1.0
    return LindbladSpec(H), diagonal_factors(d), p0
