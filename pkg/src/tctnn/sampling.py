"""Observation masks, their sub-tensor sampling counts, and the projection P."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor_core import check_shape, trailing_count

RNG_ALGORITHM = "PCG64"


@dataclass(frozen=True, eq=False)
class SamplingMask:
    """0/1 indicator tensor for an observation set, with cached per-horizontal
    and per-lateral sampled-entry counts. Immutable after construction."""

    indicator: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ind = np.ascontiguousarray(self.indicator, dtype=np.float64)
        check_shape(ind.shape)
        if not ((ind == 0.0) | (ind == 1.0)).all():
            raise ValueError("mask entries must be exactly 0.0 or 1.0")
        ind.setflags(write=False)
        object.__setattr__(self, "indicator", ind)
        object.__setattr__(
            self, "_horizontal", ind.sum(axis=tuple(range(1, ind.ndim))).astype(np.int64)
        )
        object.__setattr__(
            self, "_lateral",
            ind.sum(axis=(0,) + tuple(range(2, ind.ndim))).astype(np.int64),
        )

    @property
    def shape(self) -> tuple[int, ...]:
        return self.indicator.shape

    @property
    def total_count(self) -> int:
        return int(self._horizontal.sum())

    def horizontal_count(self, i1: int) -> int:
        """Sampled entries in the i1-th horizontal sub-tensor (0-indexed)."""
        if not 0 <= i1 < self.shape[0]:
            raise IndexError(f"horizontal index {i1} out of range [0, {self.shape[0]})")
        return int(self._horizontal[i1])

    def lateral_count(self, i2: int) -> int:
        """Sampled entries in the i2-th lateral sub-tensor (0-indexed)."""
        if not 0 <= i2 < self.shape[1]:
            raise IndexError(f"lateral index {i2} out of range [0, {self.shape[1]})")
        return int(self._lateral[i2])

    def complement(self) -> "SamplingMask":
        return SamplingMask(1.0 - self.indicator)


def min_sampling_ratio(mask: SamplingMask) -> float:
    """Smallest fraction of sampled entries over all horizontal and lateral
    sub-tensors; 0 when any sub-tensor is fully unobserved, 1 when complete."""
    m1, m2 = mask.shape[0], mask.shape[1]
    m = trailing_count(mask.shape)
    horizontal = mask._horizontal / (m2 * m)
    lateral = mask._lateral / (m1 * m)
    return float(min(horizontal.min(), lateral.min()))


def prediction_mask(t: int, h: int, trailing: tuple[int, ...]) -> SamplingMask:
    """Forecasting mask: first t-h time samples observed, last h missing."""
    if not 0 <= h < t:
        raise ValueError(f"horizon must satisfy 0 <= h < t, got h={h}, t={t}")
    ind = np.ones((t,) + tuple(trailing), dtype=np.float64)
    if h:
        ind[t - h:] = 0.0
    return SamplingMask(ind, meta={"kind": "prediction", "t": t, "horizon": h})


def bernoulli_mask(shape, p: float, seed: int) -> SamplingMask:
    """I.i.d. Bernoulli(p) mask, reproducible under ``seed``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    shape = check_shape(shape)
    rng = np.random.Generator(np.random.PCG64(seed))
    ind = (rng.random(shape) < p).astype(np.float64)
    m0 = ind.size
    frac = float(ind.sum() / m0)
    band = 3.0 * np.sqrt(p * (1.0 - p) / m0)
    meta = {
        "kind": "bernoulli",
        "p": p,
        "seed": seed,
        "algorithm": RNG_ALGORITHM,
        "empirical_fraction": frac,
        "within_band": bool(abs(frac - p) <= band),
    }
    return SamplingMask(ind, meta=meta)


def project(mask: SamplingMask, a: np.ndarray) -> np.ndarray:
    """P(a): zero out unobserved entries."""
    if a.shape != mask.shape:
        raise ValueError(f"shape mismatch: tensor {a.shape} vs mask {mask.shape}")
    return mask.indicator * a


__all__ = [
    "SamplingMask",
    "min_sampling_ratio",
    "prediction_mask",
    "bernoulli_mask",
    "project",
    "RNG_ALGORITHM",
]
