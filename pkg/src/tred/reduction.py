"""Polynomial time-dependent reduced generators.

Given a generator ``L`` (n x n) and a factorized projector ``P = J R`` with
``R J = I_m``, :func:`build_F_terms` returns the coefficients of

    F(t) = F_1 + t F_2 + ... + t^N F_{N+1}

chosen so that the time-ordered exponential of ``F`` matches
``R exp(tL) J`` order by order in ``t``.  :func:`exact_tcl_oracle` evaluates
the exact (non-polynomial) time-local generator for cross-checks.
"""
from dataclasses import dataclass
from math import factorial
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import BreakdownError, DimensionError
from .linalg import as_matrix, expm, hs_norm, op_norm, quad_fixed

__all__ = [
    "ProjectorFactorization",
    "PolyGenerator",
    "reduced_powers",
    "build_F_terms",
    "first_terms_closed_form",
    "exact_tcl_oracle",
    "tcl_generator",
    "NormRow",
    "norm_study",
]

PROJECTOR_TOL = 1e-12
BREAKDOWN_COND = 1e12


@dataclass(frozen=True, eq=False)
class ProjectorFactorization:
    """Reduction ``R`` (m x n) and injection ``J`` (n x m) with ``R J = I``."""

    R: np.ndarray
    J: np.ndarray
    tol: float = PROJECTOR_TOL

    def __post_init__(self):
        R = as_matrix(self.R, "R")
        J = as_matrix(self.J, "J")
        m, n = R.shape
        if J.shape != (n, m):
            raise DimensionError(f"R has shape {R.shape} so J must be {(n, m)}, got {J.shape}")
        if m > n:
            raise DimensionError(f"reduced dimension m={m} exceeds full dimension n={n}")
        resid = np.max(np.abs(R @ J - np.eye(m)))
        if resid > self.tol:
            raise ValueError(f"R J differs from the identity by {resid:.3e}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "J", J)

    @property
    def m(self):
        return self.R.shape[0]

    @property
    def n(self):
        return self.R.shape[1]

    @property
    def P(self):
        return self.J @ self.R

    @property
    def Q(self):
        return np.eye(self.n) - self.P


@dataclass(frozen=True, eq=False)
class PolyGenerator:
    """Coefficients F_1 ... F_{N+1} stacked in an (N+1, m, m) array.

    ``coeffs[k]`` multiplies ``t**k``; the polynomial degree is ``order``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] < 1:
            raise DimensionError(f"coefficients must have shape (N+1, m, m), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def m(self):
        return self.coeffs.shape[1]

    def term(self, k):
        """F_(k), 1-based; zero beyond the stored degree."""
        if k < 1:
            raise IndexError("terms are indexed from 1")
        if k > self.order + 1:
            return np.zeros((self.m, self.m), dtype=np.complex128)
        return self.coeffs[k - 1]

    def __call__(self, t):
        """Evaluate F(t) by Horner's rule."""
        out = self.coeffs[-1].copy()
        for k in range(self.order - 1, -1, -1):
            out = out * t + self.coeffs[k]
        return out

    def truncate(self, order):
        """The generator of lower degree sharing the leading coefficients."""
        if order > self.order:
            raise ValueError(f"cannot extend a degree-{self.order} generator to {order}")
        return PolyGenerator(self.coeffs[: order + 1])


def _check_generator(L, proj):
    L = as_matrix(L, "L")
    if L.shape != (proj.n, proj.n):
        raise DimensionError(f"L has shape {L.shape}; projector acts on dimension {proj.n}")
    return L


def reduced_powers(L, proj, kmax):
    """Return [R L^k J / k! for k = 0..kmax] without forming L^k.

    The factorial is folded into the running column block so that high
    powers neither overflow nor lose relative precision.
    """
    L = _check_generator(L, proj)
    w = proj.J.copy()
    out = [proj.R @ w]
    for k in range(1, kmax + 1):
        w = (L @ w) / k
        out.append(proj.R @ w)
    return out


def build_F_terms(L, proj, order):
    """Coefficients of the degree-``order`` polynomial generator.

    F_(k) = k C_k - sum_{h=1}^{k-1} F_(k-h) C_h  with  C_h = R L^h J / h!.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    C = reduced_powers(L, proj, order + 1)
    F = []
    for k in range(1, order + 2):
        acc = k * C[k]
        for h in range(1, k):
            acc = acc - F[k - h - 1] @ C[h]
        F.append(acc)
    return PolyGenerator(np.array(F))


def first_terms_closed_form(L, proj):
    """F_1, F_2, F_3 written out explicitly (test oracle)."""
    L = _check_generator(L, proj)
    R, J = proj.R, proj.J
    RLJ = R @ L @ J
    RL2J = R @ L @ L @ J
    RL3J = R @ L @ L @ L @ J
    F1 = RLJ
    F2 = RL2J - RLJ @ RLJ
    F3 = 0.5 * RL3J - F2 @ RLJ - 0.5 * F1 @ RL2J
    return F1, F2, F3


def tcl_generator(L, proj, t, panels=8):
    """Exact time-local generator R L M_t^{-1} J for any real ``t``.

    M_t = I - int_0^t exp(QLQ s) QLP exp(-L s) ds.  Negative ``t`` is
    accepted here (finite-difference stencils need it); the public entry
    point is :func:`exact_tcl_oracle`.
    """
    L = _check_generator(L, proj)
    n = proj.n
    P, Q = proj.P, proj.Q
    QLQ = Q @ L @ Q
    QLP = Q @ L @ P
    if t == 0.0:
        M = np.eye(n, dtype=np.complex128)
    else:
        integrand = lambda s: expm(QLQ * s) @ QLP @ expm(-L * s)
        if t > 0:
            M = np.eye(n) - quad_fixed(integrand, 0.0, t, panels)
        else:
            M = np.eye(n) + quad_fixed(integrand, t, 0.0, panels)
    cond = float(abs(np.linalg.cond(M, 1)))
    if not np.isfinite(cond) or cond > BREAKDOWN_COND:
        raise BreakdownError(t, cond)
    lu = scipy.linalg.lu_factor(M)
    return proj.R @ L @ scipy.linalg.lu_solve(lu, proj.J)


def exact_tcl_oracle(L, proj, t, panels=8):
    """Exact time-local reduced generator at time ``t >= 0``.

    Raises :class:`BreakdownError` when the memory matrix M_t has 1-norm
    condition number above 1e12.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    return tcl_generator(L, proj, float(t), panels)


class NormRow(NamedTuple):
    k: int
    F_hs: float
    F_op: float
    L_hs_bound: float
    L_op_bound: float


def norm_study(gen, L):
    """Per-term norms of a generator next to ||L||^k / k!."""
    lhs = hs_norm(L)
    lop = op_norm(L)
    rows = []
    for k in range(1, gen.order + 2):
        Fk = gen.term(k)
        rows.append(NormRow(k, hs_norm(Fk), op_norm(Fk),
                            lhs ** k / factorial(k), lop ** k / factorial(k)))
    return rows
