"""Shared fixtures and independent oracles.

Oracles here intentionally use numpy.linalg (eigvalsh/svd) and brute
enumeration, never the package's own Jacobi kernel or solver, so each
check runs along two independent code paths.
"""

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(d, rng, scale=1.0):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (g + g.conj().T)


def oracle_trace_norm(a):
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def oracle_closest_diagonal(rho, coarse=1e-3, fine=1e-6):
    """Two-stage grid minimization of ||rho - diag(p, 1-p)||_1 for qubits."""

    def value(p):
        return float(np.sum(np.abs(np.linalg.eigvalsh(rho - np.diag([p, 1.0 - p])))))

    grid = np.arange(0.0, 1.0 + coarse, coarse)
    vals = [value(p) for p in grid]
    k = int(np.argmin(vals))
    lo = max(0.0, grid[k] - 2 * coarse)
    hi = min(1.0, grid[k] + 2 * coarse)
    grid2 = np.arange(lo, hi + fine, fine)
    return min(value(p) for p in grid2)


def oracle_robustness_qubit(rho, coarse=1e-3, fine=1e-6):
    """Grid minimization of Tr(D) - 1 over feasible diagonal D >= rho.

    Feasibility for D = diag(a, b): a >= rho00, b >= rho11 and
    (a - rho00)(b - rho11) >= |rho01|^2; at the boundary b is determined
    by a, so a one-dimensional grid over the slack u = a - rho00 suffices.
    """
    z = abs(rho[0, 1])
    if z < 1e-15:
        return 0.0

    def value(u):
        return u + z * z / u

    grid = np.arange(coarse, 2.0 + coarse, coarse)
    vals = [value(u) for u in grid]
    k = int(np.argmin(vals))
    lo = max(fine, grid[k] - 2 * coarse)
    hi = grid[k] + 2 * coarse
    grid2 = np.arange(lo, hi + fine, fine)
    return min(value(u) for u in grid2)


def oracle_partial_trace(x, dims, which):
    d_a, d_b = dims
    if which == "B":
        out = np.zeros((d_a, d_a), dtype=complex)
        for i in range(d_a):
            for j in range(d_a):
                out[i, j] = sum(x[i * d_b + b, j * d_b + b] for b in range(d_b))
        return out
    out = np.zeros((d_b, d_b), dtype=complex)
    for i in range(d_b):
        for j in range(d_b):
            out[i, j] = sum(x[a * d_b + i, a * d_b + j] for a in range(d_a))
    return out


def haar_state(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())
