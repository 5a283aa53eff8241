"""The three projectors (magnitude, consistency, mixing) and weight schemes.

A source set is represented as a J x F x T complex array; magnitude targets
and mixing weights as J x F x T real arrays.
"""

from __future__ import annotations

import numpy as np

from .spectral import StftConfig, g_operator


def unit_phasor(s: np.ndarray) -> np.ndarray:
    """s / |s| with the convention that zero entries map to 1."""
    mag = np.abs(s)
    return np.where(mag > 0, s / np.where(mag > 0, mag, 1.0), 1.0 + 0.0j)


def _as_source_set(s) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim != 3 or s.shape[0] < 1:
        raise ValueError("source set must be a J x F x T array with J >= 1")
    if not np.all(np.isfinite(s)):
        raise ValueError("source set contains non-finite entries")
    return s


def weights_uniform(n_sources: int, shape: tuple[int, int]) -> np.ndarray:
    """Constant 1/J mixing weights."""
    if n_sources < 1:
        raise ValueError("need at least one source")
    return np.full((n_sources,) + tuple(shape), 1.0 / n_sources)


def weights_magnitude_ratio(mags: np.ndarray, floor: float | None = None) -> np.ndarray:
    """Per-bin magnitude-ratio weights V_j / sum_k V_k.

    Bins whose total magnitude is at or below ``floor`` fall back to the
    uniform 1/J split so the sum-to-one constraint holds everywhere.  The
    default floor is 1e-12 times the largest magnitude entry.
    """
    mags = np.asarray(mags, dtype=np.float64)
    if mags.ndim != 3:
        raise ValueError("magnitudes must be a J x F x T array")
    if np.any(mags < 0):
        raise ValueError("invalid magnitude")
    if floor is None:
        floor = 1e-12 * mags.max() if mags.size else 0.0
    n_sources = mags.shape[0]
    total = mags.sum(axis=0)
    ok = total > floor
    safe_total = np.where(ok, total, 1.0)
    w = np.where(ok[None], mags / safe_total[None], 1.0 / n_sources)
    return w


def p_mag(sources: np.ndarray, mags: np.ndarray) -> np.ndarray:
    """Magnitude projector: keep each bin's phase, impose target magnitude.

    Zero-magnitude input bins get phase factor 1.
    """
    sources = _as_source_set(sources)
    mags = np.asarray(mags, dtype=np.float64)
    if mags.shape != sources.shape:
        raise ValueError("shape mismatch between sources and magnitudes")
    if np.any(mags < 0):
        raise ValueError("invalid magnitude")
    return unit_phasor(sources) * mags


def p_cons(sources: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Consistency projector: apply the G operator to each source."""
    sources = _as_source_set(sources)
    return np.stack([g_operator(s, cfg) for s in sources])


def p_mix(sources: np.ndarray, mixture: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Mixing projector: distribute the mixing residual by the weights.

    The outputs sum to the mixture exactly (up to rounding) because the
    weights sum to one at every bin.
    """
    sources = _as_source_set(sources)
    mixture = np.asarray(mixture, dtype=np.complex128)
    weights = np.asarray(weights, dtype=np.float64)
    if mixture.shape != sources.shape[1:]:
        raise ValueError("shape mismatch between sources and mixture")
    if weights.shape != sources.shape:
        raise ValueError("shape mismatch between sources and weights")
    residual = mixture - sources.sum(axis=0)
    return sources + weights * residual[None]
