"""Aberth–Ehrlich simultaneous root iteration kernels.

The solver kernel exists twice: a numba ``@njit`` version and a pure-numpy
twin.  The numba path is selected automatically when numba imports; set
``TIMF_DISABLE_NUMBA=1`` to force the numpy path (``benchmarks/`` compares
the two).  Both backends are deterministic given the same seed.

Coefficients are ascending complex128 arrays (index = power).
"""

from __future__ import annotations

import math
import os

import numpy as np

DISABLE_NUMBA = os.environ.get("TIMF_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    import numba
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    NUMBA_AVAILABLE = False

DEFAULT_SEED = 987654321


def initial_circle(coeffs: np.ndarray, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Perturbed-circle initial guesses.

    Centered at the root centroid with a Cauchy-bound radius; angles carry a
    small seeded jitter so no guess starts on a symmetry axis of the root
    set.  Deterministic for a given (coeffs length, seed).
    """
    n = len(coeffs) - 1
    lc = coeffs[-1]
    centroid = -coeffs[-2] / (n * lc) if n >= 1 else 0.0
    radius = 1.0 + max(abs(coeffs[i] / lc) for i in range(n))
    rng = np.random.default_rng(seed)
    jitter = 1.0 + 0.01 * rng.standard_normal(n)
    angles = 2.0 * np.pi * (np.arange(n) + 0.37) / n + 0.05 * rng.standard_normal(n)
    return centroid + 0.5 * radius * jitter * np.exp(1j * angles)


def _aberth_numpy(coeffs, x, tol, max_iter):
    """Vectorized Aberth iteration; returns (roots, iterations, converged)."""
    n = len(x)
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))
    for it in range(max_iter):
        p = np.full(n, coeffs[-1], dtype=complex)
        for c in coeffs[-2::-1]:
            p = p * x + c
        dp = np.full(n, dcoeffs[-1], dtype=complex)
        for c in dcoeffs[-2::-1]:
            dp = dp * x + c
        bad = dp == 0
        if bad.any():
            x = x + np.where(bad, 1e-8 * (1 + abs(x)), 0)
            continue
        w = p / dp
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        s = (1.0 / diff).sum(axis=1) - 1.0  # remove the diagonal 1/1 terms
        denom = 1.0 - w * s
        denom = np.where(denom == 0, 1e-300, denom)
        delta = w / denom
        x = x - delta
        if np.max(np.abs(delta) / (1.0 + np.abs(x))) < tol:
            return x, it + 1, True
    return x, max_iter, False


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _aberth_numba(coeffs, x0, tol, max_iter):  # pragma: no cover - compiled
        n = x0.shape[0]
        m = coeffs.shape[0]
        x = x0.copy()
        dcoeffs = np.empty(m - 1, dtype=np.complex128)
        for k in range(1, m):
            dcoeffs[k - 1] = coeffs[k] * k
        for it in range(max_iter):
            max_rel = 0.0
            for i in range(n):
                xi = x[i]
                p = coeffs[m - 1]
                for k in range(m - 2, -1, -1):
                    p = p * xi + coeffs[k]
                dp = dcoeffs[m - 2]
                for k in range(m - 3, -1, -1):
                    dp = dp * xi + dcoeffs[k]
                if dp == 0:
                    x[i] = xi + 1e-8 * (1.0 + abs(xi))
                    max_rel = 1.0
                    continue
                w = p / dp
                s = 0.0 + 0.0j
                for j in range(n):
                    if j != i:
                        s += 1.0 / (xi - x[j])
                denom = 1.0 - w * s
                if denom == 0:
                    denom = 1e-300 + 0.0j
                delta = w / denom
                x[i] = xi - delta
                rel = abs(delta) / (1.0 + abs(x[i]))
                if rel > max_rel:
                    max_rel = rel
            if max_rel < tol:
                return x, it + 1, True
        return x, max_iter, False


def _newton_polish(coeffs, roots, steps=5):
    """Per-root Newton refinement on the full polynomial (no deflation);
    a step is kept only if it reduces |p|."""
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))

    def horner(cs, v):
        acc = complex(cs[-1])
        for c in cs[-2::-1]:
            acc = acc * v + c
        return acc

    out = roots.copy()
    for i, r in enumerate(out):
        pv = horner(coeffs, r)
        for _ in range(steps):
            dv = horner(dcoeffs, r)
            if dv == 0:
                break
            cand = r - pv / dv
            pc = horner(coeffs, cand)
            if abs(pc) < abs(pv):
                r, pv = cand, pc
            else:
                break
        out[i] = r
    return out


def aberth_roots(coeffs, seed=DEFAULT_SEED, tol=1e-14, max_iter=200, polish=True):
    """All complex roots of an ascending-coefficient polynomial.

    Returns (roots, converged).  Uses the numba kernel unless disabled.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    n = len(coeffs) - 1
    if n < 1:
        raise ValueError("degree must be >= 1")
    if coeffs[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    if n == 1:
        return np.array([-coeffs[0] / coeffs[1]]), True
    x0 = initial_circle(coeffs, seed)
    if NUMBA_AVAILABLE and not DISABLE_NUMBA:
        roots, _, ok = _aberth_numba(coeffs, x0, tol, max_iter)
    else:
        roots, _, ok = _aberth_numpy(coeffs, x0, tol, max_iter)
    if polish:
        roots = _newton_polish(coeffs, roots)
    return roots, bool(ok)


def backend() -> str:
    return "numba" if (NUMBA_AVAILABLE and not DISABLE_NUMBA) else "numpy"
