"""Unified alternating-projection engine for spectrogram inversion.

Every algorithm family is one row of the update table: a composition of the
magnitude, consistency and mixing projectors, possibly blended by a
consistency weight sigma.  ``sigma = SIGMA_INF`` selects the analytic
consistency-only limit; the formulas branch on it and never perform
floating-point arithmetic with infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .losses import inconsistency, magnitude_mismatch, mixing_error
from .projectors import (
    p_cons,
    p_mag,
    p_mix,
    unit_phasor,
    weights_magnitude_ratio,
    weights_uniform,
)
from .spectral import StftConfig

SIGMA_INF = float("inf")

DEFAULT_MAX_ITERATIONS = 20


class Family(str, Enum):
    AM = "am"
    MISI = "misi"
    MIX_INCONS = "mix_incons"
    MIX_INCONS_HARDMAG = "mix_incons_hardmag"
    INCONS_HARDMIX = "incons_hardmix"
    MAG_INCONS_HARDMIX = "mag_incons_hardmix"


# Families whose update does not involve sigma.
SIGMA_FREE = frozenset({Family.AM, Family.MISI, Family.INCONS_HARDMIX})

# Families where the mixing weights are fixed at 1/J.
UNIFORM_ONLY = frozenset({Family.MISI, Family.INCONS_HARDMIX, Family.MAG_INCONS_HARDMIX})


@dataclass
class AlgorithmSpec:
    """Which algorithm to run and with what parameters."""

    family: Family
    sigma: float = 0.0
    weight_scheme: str = "magratio"  # "uniform" | "magratio"
    iterations: int = DEFAULT_MAX_ITERATIONS
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    stop_tol: float | None = None  # optional relative-change early stop

    def __post_init__(self):
        self.family = Family(self.family)
        if self.weight_scheme not in ("uniform", "magratio"):
            raise ValueError(f"unknown weight scheme: {self.weight_scheme}")
        if not (self.sigma >= 0):
            raise ValueError("sigma must be nonnegative")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.iterations > self.max_iterations:
            raise ValueError(
                f"iterations {self.iterations} exceeds cap {self.max_iterations}"
            )

    def validation_warnings(self) -> list[str]:
        notes = []
        if self.family in SIGMA_FREE and self.sigma != 0.0:
            notes.append(f"sigma is ignored by {self.family.value}")
        if self.family in UNIFORM_ONLY and self.weight_scheme != "uniform":
            notes.append(f"{self.family.value} always uses uniform 1/J weights")
        return notes


@dataclass
class RunTrace:
    """Per-iteration losses plus the final estimates.

    Index 0 of each loss array is the amplitude-mask initialization, so the
    arrays have ``iterations + 1`` entries.
    """

    mixing: np.ndarray
    inconsistency: np.ndarray
    magnitude: np.ndarray
    combined: np.ndarray | None
    estimates: np.ndarray
    iterations: int
    warnings: list[str] = field(default_factory=list)


def init_amplitude_mask(mixture: np.ndarray, mags: np.ndarray) -> np.ndarray:
    """Amplitude-mask estimates: target magnitudes with the mixture's phase."""
    mixture = np.asarray(mixture, dtype=np.complex128)
    mags = np.asarray(mags, dtype=np.float64)
    if mags.ndim != 3 or mags.shape[1:] != mixture.shape:
        raise ValueError("shape mismatch between mixture and magnitudes")
    if np.any(mags < 0):
        raise ValueError("invalid magnitude")
    return unit_phasor(mixture)[None] * mags


def blend_mix_cons(y: np.ndarray, z: np.ndarray, weights: np.ndarray, sigma: float) -> np.ndarray:
    """(Y + sigma*Lambda*Z) / (1 + sigma*Lambda), with exact limits at 0 and inf."""
    if sigma == 0.0:
        return y
    if sigma == SIGMA_INF:
        return z
    return (y + sigma * weights * z) / (1.0 + sigma * weights)


def step_misi(sources, mixture, mags, cfg: StftConfig) -> np.ndarray:
    """One MISI iteration: P_mix(P_mag(P_cons(S))) with uniform weights."""
    w = weights_uniform(sources.shape[0], sources.shape[1:])
    return p_mix(p_mag(p_cons(sources, cfg), mags), mixture, w)


def step_mix_incons(sources, mixture, weights, sigma: float, cfg: StftConfig) -> np.ndarray:
    """Soft mixing + soft consistency: element-wise blend of P_mix and P_cons."""
    if sigma == 0.0:
        return p_mix(sources, mixture, weights)
    if sigma == SIGMA_INF:
        return p_cons(sources, cfg)
    y = p_mix(sources, mixture, weights)
    z = p_cons(sources, cfg)
    return blend_mix_cons(y, z, weights, sigma)


def step_mix_incons_hardmag(sources, mixture, mags, weights, sigma: float, cfg: StftConfig) -> np.ndarray:
    """As step_mix_incons but with the target magnitudes imposed exactly."""
    if sigma == 0.0:
        return p_mag(p_mix(sources, mixture, weights), mags)
    if sigma == SIGMA_INF:
        # Per-source Griffin-Lim update, no mixing constraint.
        return p_mag(p_cons(sources, cfg), mags)
    y = p_mix(sources, mixture, weights)
    z = p_cons(sources, cfg)
    return p_mag(y + sigma * weights * z, mags)


def step_incons_hardmix(sources, mixture, cfg: StftConfig) -> np.ndarray:
    """Consistency objective under a hard mixing constraint.

    Non-iterative: the correction term is itself consistent, so a second
    application leaves the estimate unchanged.
    """
    z = p_cons(sources, cfg)
    w = weights_uniform(sources.shape[0], sources.shape[1:])
    return p_mix(z, mixture, w)


def step_mag_incons_hardmix(sources, mixture, mags, sigma: float, cfg: StftConfig) -> np.ndarray:
    """Magnitude objective + soft consistency under a hard mixing constraint."""
    n_sources = sources.shape[0]
    if sigma == SIGMA_INF:
        w = p_cons(sources, cfg)
    else:
        u = p_mag(sources, mags)
        if sigma == 0.0:
            w = u
        else:
            w = (u + sigma * p_cons(sources, cfg)) / (1.0 + sigma)
    uni = weights_uniform(n_sources, sources.shape[1:])
    return p_mix(w, mixture, uni)


def _make_weights(spec: AlgorithmSpec, mags: np.ndarray) -> np.ndarray:
    if spec.family in UNIFORM_ONLY or spec.weight_scheme == "uniform":
        return weights_uniform(mags.shape[0], mags.shape[1:])
    return weights_magnitude_ratio(mags)


def run(
    spec: AlgorithmSpec,
    mixture: np.ndarray,
    mags: np.ndarray,
    cfg: StftConfig,
    on_iterate=None,
    record_losses: bool = True,
) -> RunTrace:
    """Run an algorithm from the amplitude-mask initialization.

    Records all three losses at every iterate (index 0 = initialization);
    batch drivers that only need the estimates can pass
    ``record_losses=False`` to skip the per-iterate consistency transforms.
    ``on_iterate(k, sources)`` is called at the initialization and after
    every step; it must not mutate its argument.  Deterministic for fixed
    inputs.
    """
    mixture = np.asarray(mixture, dtype=np.complex128)
    mags = np.asarray(mags, dtype=np.float64)
    warnings = spec.validation_warnings()
    weights = _make_weights(spec, mags)

    sources = init_amplitude_mask(mixture, mags)
    n_steps = 0 if spec.family is Family.AM else spec.iterations

    h, i, m = [], [], []

    def record(current):
        if record_losses:
            h.append(mixing_error(current, mixture))
            i.append(inconsistency(current, cfg))
            m.append(magnitude_mismatch(current, mags))

    record(sources)
    if on_iterate is not None:
        on_iterate(0, sources)

    executed = 0
    for k in range(1, n_steps + 1):
        prev = sources
        if spec.family is Family.MISI:
            sources = step_misi(sources, mixture, mags, cfg)
        elif spec.family is Family.MIX_INCONS:
            sources = step_mix_incons(sources, mixture, weights, spec.sigma, cfg)
        elif spec.family is Family.MIX_INCONS_HARDMAG:
            sources = step_mix_incons_hardmag(sources, mixture, mags, weights, spec.sigma, cfg)
        elif spec.family is Family.INCONS_HARDMIX:
            sources = step_incons_hardmix(sources, mixture, cfg)
        elif spec.family is Family.MAG_INCONS_HARDMIX:
            sources = step_mag_incons_hardmix(sources, mixture, mags, spec.sigma, cfg)
        else:  # pragma: no cover - AM never reaches here
            raise ValueError(f"unknown family: {spec.family}")
        if not np.all(np.isfinite(sources)):
            raise FloatingPointError("non-finite estimate produced")
        record(sources)
        executed = k
        if on_iterate is not None:
            on_iterate(k, sources)
        if spec.stop_tol is not None:
            denom = max(float(np.linalg.norm(prev.ravel())), 1e-300)
            if float(np.linalg.norm((sources - prev).ravel())) < spec.stop_tol * denom:
                break

    h = np.asarray(h)
    i = np.asarray(i)
    m = np.asarray(m)
    combined = None
    if record_losses and spec.sigma != SIGMA_INF and spec.family not in SIGMA_FREE:
        if spec.family is Family.MIX_INCONS:
            combined = h + spec.sigma * i
        elif spec.family is Family.MAG_INCONS_HARDMIX:
            combined = m + spec.sigma * i
    return RunTrace(
        mixing=h,
        inconsistency=i,
        magnitude=m,
        combined=combined,
        estimates=sources,
        iterations=executed,
        warnings=warnings,
    )
