"""Time the numba RK4 kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--steps 2000]

The sizes match the experiments: m=4 (qubit superoperators) and m=16
(Ising populations).  Compilation is excluded by a warm-up call.
"""
import argparse
import time

import numpy as np

from tred import _kernels


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def cases(steps, rng):
    for m, K in [(4, 3), (4, 11), (16, 3), (16, 7)]:
        coeffs = 0.1 * (rng.standard_normal((K, m, m)) + 1j * rng.standard_normal((K, m, m)))
        x0 = np.eye(m, dtype=np.complex128)[:, :1]
        yield (f"rk4_poly m={m} K={K}",
               lambda c=coeffs, x=x0: _kernels.rk4_poly(c, x, 0.0, 1e-3, steps),
               lambda c=coeffs, x=x0: _kernels.rk4_poly_numpy(c, x, 0.0, 1e-3, steps))
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4))
    rates = np.sin(np.linspace(0.0, 1.0, 2 * steps + 1))
    x0 = np.ones((4, 1), dtype=np.complex128)
    yield ("rk4_rate m=4",
           lambda: _kernels.rk4_rate(A, B, rates, x0, 1e-3, steps),
           lambda: _kernels.rk4_rate_numpy(A, B, rates, x0, 1e-3, steps))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--steps", type=int, default=2000)
    args = parser.parse_args(argv)
    if not _kernels.USE_NUMBA:
        print("numba path disabled (TRED_DISABLE_NUMBA set or numba missing); "
              "both columns time the numpy path")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'rel diff':>11}")
    for name, fast, slow in cases(args.steps, rng):
        a, b = fast(), slow()   # warm-up and agreement check
        diff = float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
        t_fast = best_of(fast, args.repeat)
        t_slow = best_of(slow, args.repeat)
        print(f"{name:<22}{1e3 * t_fast:>12.2f}{1e3 * t_slow:>12.2f}"
              f"{t_slow / t_fast:>9.1f}x{diff:>11.1e}")


if __name__ == "__main__":
    main()
