"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype complex128 (or real
arrays that get promoted).  Every function is pure.
"""
import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss

from .exceptions import DimensionError, NotHermitianError

__all__ = [
    "as_matrix",
    "matmul",
    "expm",
    "op_norm",
    "hs_norm",
    "herm_eig",
    "kron",
    "quad_fixed",
    "GAUSS_NODES",
]

# 5-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree <= 9.
GAUSS_NODES, GAUSS_WEIGHTS = leggauss(5)


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D complex array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _check_square(a, name):
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def matmul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def expm(a):
    """Matrix exponential (scaling and squaring, degree-13 Pade)."""
    a = as_matrix(a, "a")
    _check_square(a, "a")
    out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("matrix exponential overflowed")
    return out


def op_norm(a):
    """Largest singular value."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hs_norm(a):
    """Hilbert-Schmidt (Frobenius) norm, scaled so tiny entries do not underflow."""
    a = np.asarray(a)
    scale = float(np.max(np.abs(a), initial=0.0))
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    return scale * float(np.linalg.norm(a / scale))


def herm_eig(a, tol=1e-10):
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as (a + a^dagger)/2 after checking
    ``||a - a^dagger|| <= tol * ||a||``.  Eigenvalues are returned in ascending
    order with orthonormal eigenvectors as columns.
    """
    a = as_matrix(a, "a")
    _check_square(a, "a")
    scale = hs_norm(a)
    skew = hs_norm(a - a.conj().T)
    if skew > tol * max(scale, np.finfo(float).tiny):
        raise NotHermitianError(f"matrix is not Hermitian: ||a - a^H|| = {skew:.3e}")
    sym = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(sym)
    return w, v


def kron(a, b):
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def quad_fixed(f, a, b, panels=1):
    """Composite 5-point Gauss-Legendre quadrature of a matrix-valued ``f``.

    The interval [a, b] is split into ``panels`` equal subintervals.
    """
    if panels < 1:
        raise ValueError("panels must be >= 1")
    if b < a:
        raise ValueError("quad_fixed requires a <= b")
    edges = np.linspace(a, b, panels + 1)
    total = None
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for x, w in zip(GAUSS_NODES, GAUSS_WEIGHTS):
            term = (w * half) * np.asarray(f(mid + half * x), dtype=np.complex128)
            total = term if total is None else total + term
    return total
