#!/usr/bin/env python3
"""Benchmark the Aberth-Ehrlich kernels: numba @njit vs the pure-numpy twin.

The workload mirrors the hot paths of the package: thousands of degree-3 and
degree-7 solves as they occur in grid scans and branch traces.  Run with
TIMF_DISABLE_NUMBA=1 to confirm the fallback is selected package-wide.
"""

import time

import numpy as np

from timf import kernels


def workload_coeffs(n_points=4000, seed=7):
    rng = np.random.default_rng(seed)
    earlier = []
    # symmetric cubic over a z-grid
    for z in rng.uniform(-2, 2, size=(n_points // 2, 2)) @ np.array([1, 1j]):
        earlier.append(np.array([z, 2 * z, 0.0, 2.0], dtype=complex))
    # degree-7 conditions at scattered z
    for z in rng.uniform(-3, 3, size=(n_points // 2, 2)) @ np.array([1, 1j]):
        c = rng.normal(size=8) + 1j * rng.normal(size=8)
        c[-1] += 3.0
        earlier.append(c * (1 + 0.1 * abs(z)))
    return earlier


def run_backend(label, solver, coeff_sets):
    t0 = time.perf_counter()
    out = []
    for c in coeff_sets:
        x0 = kernels.initial_circle(c)
        roots, _, ok = solver(c, x0, 1e-14, 200)
        out.append(kernels._newton_polish(c, roots))
    dt = time.perf_counter() - t0
    print(f"{label:>6}: {dt:.3f}s for {len(coeff_sets)} solves "
          f"({1e6 * dt / len(coeff_sets):.1f} us/solve)")
    return out, dt


def main():
    print(f"numba available: {kernels.NUMBA_AVAILABLE}")
    print(f"selected backend: {kernels.backend()}")
    coeff_sets = workload_coeffs()

    numpy_out, numpy_dt = run_backend("numpy", kernels._aberth_numpy, coeff_sets)

    if kernels.NUMBA_AVAILABLE:
        # warm the JIT outside the timed region
        kernels._aberth_numba(coeff_sets[0], kernels.initial_circle(coeff_sets[0]),
                              1e-14, 10)
        numba_out, numba_dt = run_backend("numba", kernels._aberth_numba, coeff_sets)
        print(f"speedup: {numpy_dt / numba_dt:.2f}x")
        worst = 0.0
        for a, b in zip(numpy_out, numba_out):
            sa = np.sort_complex(a)
            sb = np.sort_complex(b)
            worst = max(worst, float(np.max(np.abs(sa - sb))))
        print(f"results match: {worst < 1e-9} (worst root gap {worst:.2e})")
    else:
        print("numba not importable; numpy path only")


if __name__ == "__main__":
    main()
