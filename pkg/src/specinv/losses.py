"""Objective functions: mixing error, inconsistency, magnitude mismatch.

All three are squared Frobenius norms accumulated in double precision
(numpy's pairwise summation), so per-iteration traces are stable enough to
compare at 1e-9 relative tolerance.
"""

from __future__ import annotations

import numpy as np

from .spectral import StftConfig, g_operator


def _sq_norm(a: np.ndarray) -> float:
    return float(np.sum(np.abs(a) ** 2))


def mixing_error(sources: np.ndarray, mixture: np.ndarray) -> float:
    """||X - sum_j S_j||^2."""
    sources = np.asarray(sources, dtype=np.complex128)
    mixture = np.asarray(mixture, dtype=np.complex128)
    if sources.ndim != 3 or mixture.shape != sources.shape[1:]:
        raise ValueError("shape mismatch between sources and mixture")
    return _sq_norm(mixture - sources.sum(axis=0))


def inconsistency(sources: np.ndarray, cfg: StftConfig) -> float:
    """sum_j ||S_j - G(S_j)||^2."""
    sources = np.asarray(sources, dtype=np.complex128)
    if sources.ndim != 3:
        raise ValueError("source set must be a J x F x T array")
    return sum(_sq_norm(s - g_operator(s, cfg)) for s in sources)


def magnitude_mismatch(sources: np.ndarray, mags: np.ndarray) -> float:
    """sum_j || |S_j| - V_j ||^2."""
    sources = np.asarray(sources, dtype=np.complex128)
    mags = np.asarray(mags, dtype=np.float64)
    if sources.shape != mags.shape:
        raise ValueError("shape mismatch between sources and magnitudes")
    return _sq_norm(np.abs(sources) - mags)
