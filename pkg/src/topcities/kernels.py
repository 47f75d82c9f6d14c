"""Batch numeric kernels for large city sets and simulations.

The scalar routines in :mod:`topcities.stats` keep exact-rational pooling and
are what the pipeline uses per city.  These array kernels trade that for
throughput when scoring many (n, n_o) pairs at once, e.g. in Monte Carlo
calibration runs and benchmarks.

Set ``TOPCITIES_NO_NUMBA=1`` to force the pure-numpy fallback even when numba
is installed.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLE = os.environ.get("TOPCITIES_NO_NUMBA", "").lower() in ("1", "true", "yes")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _z_scores_numpy(n: np.ndarray, n_o: np.ndarray, p_e: float) -> np.ndarray:
    n = n.astype(np.float64)
    n_o = n_o.astype(np.float64)
    p_o = n_o / n
    pool = (n_o + n * p_e) / (2.0 * n)
    return (p_o - p_e) / np.sqrt(pool * (1.0 - pool) * (2.0 / n))


def _z_scores_loop(n, n_o, p_e, out):
    for i in range(n.shape[0]):
        ni = float(n[i])
        p_o = n_o[i] / ni
        pool = (n_o[i] + ni * p_e) / (2.0 * ni)
        out[i] = (p_o - p_e) / math.sqrt(pool * (1.0 - pool) * (2.0 / ni))


def _p_values_numpy(z: np.ndarray) -> np.ndarray:
    from scipy.special import erfc as _erfc  # local import; scipy optional elsewhere

    return _erfc(np.abs(z) / math.sqrt(2.0))


def _p_values_loop(z, out):
    for i in range(z.shape[0]):
        out[i] = math.erfc(abs(z[i]) / math.sqrt(2.0))


if HAVE_NUMBA:
    _z_scores_jit = njit(cache=True)(_z_scores_loop)
    _p_values_jit = njit(cache=True)(_p_values_loop)


def z_scores(n, n_o, p_e: float) -> np.ndarray:
    """Vectorized pooled two-proportion z over parallel arrays."""
    n = np.asarray(n, dtype=np.float64)
    n_o = np.asarray(n_o, dtype=np.float64)
    if n.shape != n_o.shape:
        raise ValueError("n and n_o must have the same shape")
    if HAVE_NUMBA:
        out = np.empty(n.shape[0], dtype=np.float64)
        _z_scores_jit(n, n_o, float(p_e), out)
        return out
    return _z_scores_numpy(n, n_o, float(p_e))


def p_values(z) -> np.ndarray:
    """Vectorized two-sided normal tail probabilities."""
    z = np.asarray(z, dtype=np.float64)
    if HAVE_NUMBA:
        out = np.empty(z.shape[0], dtype=np.float64)
        _p_values_jit(z, out)
        return out
    try:
        return _p_values_numpy(z)
    except ImportError:
        return np.array([math.erfc(abs(v) / math.sqrt(2.0)) for v in z])
