"""RK4 inner loops for time-dependent linear ODEs.

Two implementations of each kernel live here: a numba ``@njit`` version with
explicit loops and a plain numpy version.  The numba path is used when numba
imports cleanly and ``TRED_DISABLE_NUMBA`` is unset (or set to ``0``).
Both paths are deterministic; they are not bit-identical to each other.
"""
import os

import numpy as np

__all__ = ["USE_NUMBA", "rk4_poly", "rk4_rate", "rk4_poly_numpy", "rk4_rate_numpy"]


def _numba_requested():
    flag = os.environ.get("TRED_DISABLE_NUMBA", "0").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by TRED_DISABLE_NUMBA")
    from numba import njit
    USE_NUMBA = True
except ImportError:
    USE_NUMBA = False


# --------------------------------------------------------------------------
# numpy fallback
# --------------------------------------------------------------------------

def _horner_numpy(coeffs, t):
    out = coeffs[-1].copy()
    for k in range(coeffs.shape[0] - 2, -1, -1):
        out = out * t + coeffs[k]
    return out


def rk4_poly_numpy(coeffs, x0, t0, dt, steps):
    """Integrate dx/dt = (sum_k t^k coeffs[k]) x with classical RK4.

    ``coeffs`` has shape (K, m, m), ``x0`` shape (m, p).  Returns the
    (steps + 1, m, p) array of states on the uniform grid t0 + j*dt.
    """
    out = np.empty((steps + 1,) + x0.shape, dtype=np.complex128)
    x = x0.astype(np.complex128, copy=True)
    out[0] = x
    half = 0.5 * dt
    for j in range(steps):
        t = t0 + j * dt
        f0 = _horner_numpy(coeffs, t)
        fh = _horner_numpy(coeffs, t + half)
        f1 = _horner_numpy(coeffs, t + dt)
        k1 = f0 @ x
        k2 = fh @ (x + half * k1)
        k3 = fh @ (x + half * k2)
        k4 = f1 @ (x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j + 1] = x
    return out


def rk4_rate_numpy(a, b, rates, x0, dt, steps):
    """Integrate dx/dt = (a + r(t) b) x with classical RK4.

    ``rates`` holds r sampled on the half-step grid, length 2*steps + 1:
    rates[2j] = r(t_j), rates[2j+1] = r(t_j + dt/2).
    """
    out = np.empty((steps + 1,) + x0.shape, dtype=np.complex128)
    x = x0.astype(np.complex128, copy=True)
    out[0] = x
    half = 0.5 * dt
    for j in range(steps):
        g0 = a + rates[2 * j] * b
        gh = a + rates[2 * j + 1] * b
        g1 = a + rates[2 * j + 2] * b
        k1 = g0 @ x
        k2 = gh @ (x + half * k1)
        k3 = gh @ (x + half * k2)
        k4 = g1 @ (x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j + 1] = x
    return out


# --------------------------------------------------------------------------
# numba kernels
# --------------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _horner_nb(coeffs, t, out):
        nk, m, _ = coeffs.shape
        for i in range(m):
            for j in range(m):
                out[i, j] = coeffs[nk - 1, i, j]
        for k in range(nk - 2, -1, -1):
            for i in range(m):
                for j in range(m):
                    out[i, j] = out[i, j] * t + coeffs[k, i, j]

    @njit(cache=True)
    def _matmul_into(g, x, out):
        m, p = x.shape
        for i in range(m):
            for c in range(p):
                acc = 0j
                for k in range(m):
                    acc += g[i, k] * x[k, c]
                out[i, c] = acc

    @njit(cache=True)
    def _rk4_poly_nb(coeffs, x0, t0, dt, steps):
        m, p = x0.shape
        out = np.empty((steps + 1, m, p), dtype=np.complex128)
        x = x0.copy()
        out[0] = x
        f0 = np.empty((m, m), dtype=np.complex128)
        fh = np.empty((m, m), dtype=np.complex128)
        f1 = np.empty((m, m), dtype=np.complex128)
        k1 = np.empty((m, p), dtype=np.complex128)
        k2 = np.empty((m, p), dtype=np.complex128)
        k3 = np.empty((m, p), dtype=np.complex128)
        k4 = np.empty((m, p), dtype=np.complex128)
        tmp = np.empty((m, p), dtype=np.complex128)
        half = 0.5 * dt
        for j in range(steps):
            t = t0 + j * dt
            _horner_nb(coeffs, t, f0)
            _horner_nb(coeffs, t + half, fh)
            _horner_nb(coeffs, t + dt, f1)
            _matmul_into(f0, x, k1)
            for i in range(m):
                for c in range(p):
                    tmp[i, c] = x[i, c] + half * k1[i, c]
            _matmul_into(fh, tmp, k2)
            for i in range(m):
                for c in range(p):
                    tmp[i, c] = x[i, c] + half * k2[i, c]
            _matmul_into(fh, tmp, k3)
            for i in range(m):
                for c in range(p):
                    tmp[i, c] = x[i, c] + dt * k3[i, c]
            _matmul_into(f1, tmp, k4)
            for i in range(m):
                for c in range(p):
                    x[i, c] = x[i, c] + (dt / 6.0) * (
                        k1[i, c] + 2.0 * k2[i, c] + 2.0 * k3[i, c] + k4[i, c])
            out[j + 1] = x
        return out

    @njit(cache=True)
    def _rk4_rate_nb(a, b, rates, x0, dt, steps):
        m, p = x0.shape
        out = np.empty((steps + 1, m, p), dtype=np.complex128)
        x = x0.copy()
        out[0] = x
        g0 = np.empty((m, m), dtype=np.complex128)
        gh = np.empty((m, m), dtype=np.complex128)
        g1 = np.empty((m, m), dtype=np.complex128)
        k1 = np.empty((m, p), dtype=np.complex128)
        k2 = np.empty((m, p), dtype=np.complex128)
        k3 = np.empty((m, p), dtype=np.complex128)
        k4 = np.empty((m, p), dtype=np.complex128)
        tmp = np.empty((m, p), dtype=np.complex128)
        half = 0.5 * dt
        for j in range(steps):
            r0 = rates[2 * j]
            rh = rates[2 * j + 1]
            r1 = rates[2 * j + 2]
            for i in range(m):
                for c in range(m):
                    g0[i, c] = a[i, c] + r0 * b[i, c]
                    gh[i, c] = a[i, c] + rh * b[i, c]
                    g1[i, c] = a[i, c] + r1 * b[i, c]
            _matmul_into(g0, x, k1)
            for i in range(m):
                for c in range(p):
                    tmp[i, c] = x[i, c] + half * k1[i, c]
            _matmul_into(gh, tmp, k2)
            for i in range(m):
                for c in range(p):
                    tmp[i, c] = x[i, c] + half * k2[i, c]
            _matmul_into(gh, tmp, k3)
            for i in range(m):
                for c in range(p):
                    tmp[i, c] = x[i, c] + dt * k3[i, c]
            _matmul_into(g1, tmp, k4)
            for i in range(m):
                for c in range(p):
                    x[i, c] = x[i, c] + (dt / 6.0) * (
                        k1[i, c] + 2.0 * k2[i, c] + 2.0 * k3[i, c] + k4[i, c])
            out[j + 1] = x
        return out


def rk4_poly(coeffs, x0, t0, dt, steps):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    x0 = np.ascontiguousarray(x0, dtype=np.complex128)
    if USE_NUMBA:
        return _rk4_poly_nb(coeffs, x0, float(t0), float(dt), int(steps))
    return rk4_poly_numpy(coeffs, x0, float(t0), float(dt), int(steps))


def rk4_rate(a, b, rates, x0, dt, steps):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    rates = np.ascontiguousarray(rates, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.complex128)
    if rates.shape != (2 * steps + 1,):
        raise ValueError(f"rates must have length 2*steps+1={2 * steps + 1}, got {rates.shape}")
    if USE_NUMBA:
        return _rk4_rate_nb(a, b, rates, x0, float(dt), int(steps))
    return rk4_rate_numpy(a, b, rates, x0, float(dt), int(steps))
