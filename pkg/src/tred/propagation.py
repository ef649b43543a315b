"""Propagating reduced dynamics.

The reduced evolution can be obtained three ways: the power series of the
time-ordered exponential of a polynomial generator, fixed-step RK4 on
dz/dt = F(t) z, and the exact reference R exp(tL) J.
"""
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np

from . import _kernels
from .exceptions import SeriesTruncationWarning
from .linalg import as_matrix, expm, op_norm
from .reduction import reduced_powers

__all__ = [
    "PropagatorSeries",
    "Trajectory",
    "build_E_terms",
    "eval_series",
    "integrate_ltv",
    "propagate_ltv",
    "exact_reduced",
    "taylor_baseline",
    "error_curve",
    "difference_coefficients",
    "DEFAULT_SERIES_TERMS",
]

DEFAULT_SERIES_TERMS = 100
TRUNCATION_RATIO = 1e-8


@dataclass(frozen=True, eq=False)
class PropagatorSeries:
    """E_0 ... E_K of T exp(int_0^t F) = sum_k t^k E_k, stacked as (K+1, m, m)."""

    terms: np.ndarray
    source_order: int

    @property
    def K(self):
        return self.terms.shape[0] - 1


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a nonempty 1-D sequence")
        if times[0] != 0.0:
            raise ValueError("trajectories start at t = 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        states = np.asarray(self.states)
        if states.shape[0] != times.size:
            raise ValueError(f"{states.shape[0]} states for {times.size} times")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self):
        return self.times.size


def build_E_terms(gen, K=DEFAULT_SERIES_TERMS):
    """Series coefficients via E_k = (1/k) sum_{s=1}^{k} F_s E_{k-s}."""
    if K < 1:
        raise ValueError("K must be >= 1")
    m = gen.m
    E = np.empty((K + 1, m, m), dtype=np.complex128)
    E[0] = np.eye(m)
    top = gen.order + 1
    for k in range(1, K + 1):
        acc = np.zeros((m, m), dtype=np.complex128)
        for s in range(1, min(k, top) + 1):
            acc += gen.coeffs[s - 1] @ E[k - s]
        E[k] = acc / k
    return PropagatorSeries(E, gen.order)


def eval_series(series, t):
    """sum_k t^k E_k by Horner's rule.

    Emits :class:`SeriesTruncationWarning` when the last term is larger
    than 1e-8 of the result.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    E = series.terms
    out = E[-1].copy()
    for k in range(series.K - 1, -1, -1):
        out = out * t + E[k]
    last = np.linalg.norm(E[-1]) * t ** series.K
    if last > TRUNCATION_RATIO * np.linalg.norm(out):
        warnings.warn(
            f"series truncation at K={series.K} dominates at t={t}: last term {last:.2e}",
            SeriesTruncationWarning, stacklevel=2)
    return out


def _as_block(z0, m):
    z = np.asarray(z0, dtype=np.complex128)
    if z.shape == (m,):
        return z.reshape(m, 1), True
    if z.ndim == 2 and z.shape[0] == m:
        return z, False
    raise ValueError(f"initial condition must have leading dimension {m}, got {z.shape}")


def propagate_ltv(gen, z0, t0, t1, steps):
    """RK4 from ``t0`` to ``t1``; returns all (steps+1) intermediate states."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    z, is_vec = _as_block(z0, gen.m)
    dt = (t1 - t0) / steps
    out = _kernels.rk4_poly(gen.coeffs, z, t0, dt, steps)
    return out[:, :, 0] if is_vec else out


def integrate_ltv(gen, z0, t_max, steps):
    """Classical RK4 on dz/dt = F(t) z over [0, t_max] with ``steps`` steps.

    ``z0`` may be an m-vector or an (m, p) block (e.g. the identity, to get
    the propagator itself).
    """
    if t_max <= 0:
        raise ValueError("t_max must be > 0")
    states = propagate_ltv(gen, z0, 0.0, float(t_max), steps)
    times = np.linspace(0.0, t_max, steps + 1)
    return Trajectory(times, states)


def exact_reduced(L, proj, t):
    """R exp(tL) J."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return proj.R @ expm(t * as_matrix(L, "L")) @ proj.J


def taylor_baseline(L, proj, N, t):
    """Truncated exponential sum_{k<=N} t^k/k! R L^k J."""
    if t < 0:
        raise ValueError("t must be >= 0")
    C = reduced_powers(L, proj, N)
    out = np.zeros_like(C[0])
    for k in range(N, -1, -1):
        out = out * t + C[k]
    return out


def _to_mp(a):
    return np.vectorize(mpmath.mpc, otypes=[object])(np.asarray(a, dtype=np.complex128))


def _to_complex(a):
    return np.vectorize(complex, otypes=[np.complex128])(a)


def difference_coefficients(L, proj, gen, K, dps=50):
    """D_k = E_k - R L^k J / k! for k = 0..K at ``dps`` decimal digits.

    Returns an object array of mpmath numbers, shape (K+1, m, m).  The
    generator coefficients are rebuilt from ``L`` at the same precision, so
    cancellations in the low-order D_k are resolved far below 1e-16.
    """
    with mpmath.workdps(dps):
        Lm = _to_mp(as_matrix(L, "L"))
        Rm, Jm = _to_mp(proj.R), _to_mp(proj.J)
        C = [Rm @ Jm]
        w = Jm
        for k in range(1, K + 1):
            w = (Lm @ w) / k
            C.append(Rm @ w)
        F = []
        for k in range(1, gen.order + 2):
            acc = k * C[k]
            for h in range(1, k):
                acc = acc - F[k - h - 1] @ C[h]
            F.append(acc)
        E = [C[0]]
        for k in range(1, K + 1):
            acc = F[0] @ E[k - 1]
            for s in range(2, min(k, len(F)) + 1):
                acc = acc + F[s - 1] @ E[k - s]
            E.append(acc / k)
        return np.array([E[k] - C[k] for k in range(K + 1)], dtype=object)


def error_curve(L, proj, gen, K, time_grid, x0=None, dps=None):
    """Rows (t, error) between R exp(tL) J and the series of ``gen``.

    With ``x0`` (an m-vector) the error is the Euclidean norm of the state
    difference; otherwise the operator norm of the propagator difference.
    With ``dps`` the difference is summed as sum_k t^k D_k at that many
    digits (see :func:`difference_coefficients`); the exact exponential is
    then represented by its first K+1 Taylor terms, so keep t ||L|| modest.
    """
    grid = np.asarray(time_grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("time grid must be ascending")
    rows = np.empty((grid.size, 2))
    if dps is not None:
        D = difference_coefficients(L, proj, gen, K, dps)
        diffs = []
        with mpmath.workdps(dps):
            for t in grid:
                tm = mpmath.mpf(float(t))
                acc = D[-1]
                for k in range(K - 1, -1, -1):
                    acc = acc * tm + D[k]
                diffs.append(_to_complex(acc))
    else:
        series = build_E_terms(gen, K)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SeriesTruncationWarning)
            diffs = [exact_reduced(L, proj, t) - eval_series(series, t) for t in grid]
    for i, (t, diff) in enumerate(zip(grid, diffs)):
        if x0 is None:
            err = op_norm(diff)
        else:
            err = float(np.linalg.norm(diff @ np.asarray(x0)))
        rows[i] = (t, err)
    return rows
