"""Evaluation kernels for shifted-power sums.

The single hot operation in this package is evaluating

    Sum_k c_k * (s + kappa0)**(k + sigma)

and reductions built on it, at many sample points: verification grids,
arc-length quadrature nodes, and parameter sweeps all bottom out here.
The sum is computed as u**sigma * Horner(c, u) with u = s + kappa0, which
is stable for u > 0 and costs one pow plus one fused multiply-add chain.

Kernels are numba-jitted when numba is importable.  Set QEM_BACKEND=numpy
to force the pure-numpy/python fallback (QEM_BACKEND=numba insists on the
jitted path and raises if numba is missing).  Both implementations are
always importable under explicit names so that tests can compare them and
``benchmarks/bench_kernels.py`` can time them against each other.
"""

from __future__ import annotations

import os

import numpy as np


def eval_sum_numpy(coeffs: np.ndarray, sigma: float, kappa0: float,
                   s: np.ndarray) -> np.ndarray:
    """Vectorized fallback: Sum_k c_k u^(k+sigma) at u = s + kappa0."""
    u = s + kappa0
    if coeffs.size == 0:
        return np.zeros_like(u)
    acc = np.full_like(u, coeffs[-1])
    for k in range(coeffs.size - 2, -1, -1):
        acc = acc * u + coeffs[k]
    if sigma != 0.0:
        acc = acc * u ** sigma
    return acc


def eval_sum_scalar_numpy(coeffs: np.ndarray, sigma: float, kappa0: float,
                          s: float) -> float:
    """Scalar fallback, plain python arithmetic (fast for short coeffs)."""
    u = s + kappa0
    if coeffs.size == 0:
        return 0.0
    acc = float(coeffs[-1])
    for k in range(coeffs.size - 2, -1, -1):
        acc = acc * u + coeffs[k]
    if sigma != 0.0:
        acc *= u ** sigma
    return acc


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None
    HAVE_NUMBA = False


if HAVE_NUMBA:

    @njit("float64[:](float64[:], float64, float64, float64[:])", cache=True)
    def eval_sum_numba(coeffs, sigma, kappa0, s):  # pragma: no cover - jitted
        out = np.empty(s.size, dtype=np.float64)
        n = coeffs.size
        for j in range(s.size):
            u = s[j] + kappa0
            if n == 0:
                out[j] = 0.0
                continue
            acc = coeffs[n - 1]
            for k in range(n - 2, -1, -1):
                acc = acc * u + coeffs[k]
            if sigma != 0.0:
                acc = acc * u ** sigma
            out[j] = acc
        return out

    @njit("float64(float64[:], float64, float64, float64)", cache=True)
    def eval_sum_scalar_numba(coeffs, sigma, kappa0, s):  # pragma: no cover
        u = s + kappa0
        n = coeffs.size
        if n == 0:
            return 0.0
        acc = coeffs[n - 1]
        for k in range(n - 2, -1, -1):
            acc = acc * u + coeffs[k]
        if sigma != 0.0:
            acc = acc * u ** sigma
        return acc

else:
    eval_sum_numba = None
    eval_sum_scalar_numba = None


def _select_backend() -> str:
    requested = os.environ.get("QEM_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not HAVE_NUMBA:
            raise ImportError("QEM_BACKEND=numba but numba is not importable")
        return "numba"
    if requested not in ("", "auto"):
        raise ValueError(f"unknown QEM_BACKEND value: {requested!r}")
    return "numba" if HAVE_NUMBA else "numpy"


BACKEND = _select_backend()

if BACKEND == "numba":
    eval_sum = eval_sum_numba
    eval_sum_scalar = eval_sum_scalar_numba
else:
    eval_sum = eval_sum_numpy
    eval_sum_scalar = eval_sum_scalar_numpy


def backend() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return BACKEND
