import numpy as np
import pytest

from tred.reduction import ProjectorFactorization

# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_projection(rng, n, m):
    """Generic (non-orthogonal) R, J with R J = I."""
    R = random_complex(rng, (m, n))
    J0 = random_complex(rng, (n, m))
    J = J0 @ np.linalg.inv(R @ J0)
    return ProjectorFactorization(R, J, tol=1e-10)


def random_stable(rng, n, norm=1.0):
    """Random complex matrix with spectrum in the open left half-plane."""
    A = random_complex(rng, (n, n))
    A = A - (np.max(np.linalg.eigvals(A).real) + 0.5) * np.eye(n)
    return norm * A / np.linalg.norm(A, 2)


def random_hermitian(rng, d):
    A = random_complex(rng, (d, d))
    return 0.5 * (A + A.conj().T)


def random_density(rng, d, min_eig=0.05):
    A = random_complex(rng, (d, d))
    rho = A @ A.conj().T + min_eig * d * np.eye(d)
    return rho / np.trace(rho).real


def _richardson(D, h, p, levels=2):
    """Extrapolate D(h) = D + c h^p + c' h^(p+2) + ... from steps h, h/2, h/4."""
    row = [D(h / 2 ** i) for i in range(levels + 1)]
    for lev in range(levels):
        q = 2 ** (p + 2 * lev)
        row = [(q * row[i + 1] - row[i]) / (q - 1) for i in range(len(row) - 1)]
    return row[0]


def fd_taylor_coefficients(f, h=1e-2):
    """Taylor coefficients c_0..c_3 of a matrix function at 0.

    Five-point central stencils with step ``h`` and two Richardson levels.
    """
    f0 = f(0.0)
    cache = {}

    def F(x):
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    d1 = lambda s: (F(-2 * s) - 8 * F(-s) + 8 * F(s) - F(2 * s)) / (12 * s)
    d2 = lambda s: (-F(2 * s) + 16 * F(s) - 30 * f0 + 16 * F(-s) - F(-2 * s)) / (12 * s * s)
    d3 = lambda s: (F(2 * s) - 2 * F(s) + 2 * F(-s) - F(-2 * s)) / (2 * s ** 3)
    return [f0, _richardson(d1, h, 4), _richardson(d2, h, 4) / 2, _richardson(d3, h, 2) / 6]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:2d}. {title}: {detail}")
