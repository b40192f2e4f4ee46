"""Temporal circular convolution transform for multidimensional time series.

A series is a tensor of shape (t, n1, ..., np) with time along the first mode.
The transform stacks the k circular backward time-shifts of the series as a
new second mode, turning a length-t series into a (t, k, n1, ..., np) tensor
whose entry (i, j, ...) is the sample at time (i - j) mod t. The first lateral
slice (j = 0) reproduces the series itself, so no information is lost; every
sample is replicated exactly k times.
"""

from __future__ import annotations

import math

import numpy as np

from .sampling import SamplingMask
from .tsvd import truncation_error

INVERSE_MODES = ("scaled-adjoint", "first-slice")


def check_series(series: np.ndarray) -> np.ndarray:
    series = np.asarray(series, dtype=np.float64)
    if series.ndim < 2:
        raise ValueError(f"series must have a time mode plus features, got order {series.ndim}")
    if series.shape[0] < 2:
        raise ValueError(f"series needs at least 2 time samples, got {series.shape[0]}")
    return series


def check_kernel_size(k: int, t: int) -> int:
    k = int(k)
    if not 1 <= k <= t:
        raise ValueError(f"kernel size must satisfy 1 <= k <= t, got k={k}, t={t}")
    return k


def default_kernel_size(t: int) -> int:
    """Half the time dimension, the setting that works well across datasets."""
    return max(1, math.ceil(t / 2))


def temporal_circular_conv(series: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Circular convolution along the time mode only."""
    series = check_series(series)
    kernel = np.asarray(kernel, dtype=np.float64).ravel()
    t = series.shape[0]
    check_kernel_size(kernel.size, t)
    out = np.zeros_like(series)
    for j, w in enumerate(kernel):
        out += w * np.roll(series, j, axis=0)
    return out


def conv_tensor(series: np.ndarray, k: int) -> np.ndarray:
    """Temporal convolution tensor of shape (t, k, n1, ..., np)."""
    series = check_series(series)
    t = series.shape[0]
    k = check_kernel_size(k, t)
    idx = (np.arange(t)[:, None] - np.arange(k)[None, :]) % t
    return np.ascontiguousarray(series[idx])


def conv_inverse(y: np.ndarray, mode: str = "scaled-adjoint") -> np.ndarray:
    """Map a (t, k, n1, ..., np) tensor back to a series.

    "scaled-adjoint" averages the k replicated copies of each sample, which is
    the least-squares pseudo-inverse of the transform: it agrees with the exact
    inverse on transformed series and minimizes the transform-domain residual
    for everything else. "first-slice" simply reads the j = 0 lateral slice.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim < 3:
        raise ValueError(f"expected a (t, k, features...) tensor, got order {y.ndim}")
    t, k = y.shape[0], y.shape[1]
    if k > t:
        raise ValueError(f"malformed transform tensor: k={k} exceeds t={t}")
    if mode == "first-slice":
        return np.ascontiguousarray(y[:, 0])
    if mode != "scaled-adjoint":
        raise ValueError(f"unknown inverse mode {mode!r}; expected one of {INVERSE_MODES}")
    rows = (np.arange(t)[:, None] + np.arange(k)[None, :]) % t
    cols = np.broadcast_to(np.arange(k), (t, k))
    return np.ascontiguousarray(y[rows, cols].mean(axis=1))


def conv_sampling_mask(mask: SamplingMask, k: int) -> SamplingMask:
    """Mask of the transformed observation set: the transform of the indicator.

    Sampling commutes with the transform, i.e. masking then transforming gives
    the same entries as transforming then masking with this mask.
    """
    ind = conv_tensor(mask.indicator, k)
    return SamplingMask(ind, meta={"kind": "conv", "kernel": int(k), **mask.meta})


def smoothness_eta(series: np.ndarray) -> float:
    """Root sum of squared consecutive time differences; 0 iff constant in time."""
    series = check_series(series)
    return float(np.sqrt((np.diff(series, axis=0) ** 2).sum()))


def periodicity_beta(series: np.ndarray, tau: int) -> float:
    """Largest Frobenius distance between samples tau steps apart, with
    circular wraparound; 0 iff the series is exactly tau-periodic."""
    series = check_series(series)
    t = series.shape[0]
    if not 1 <= tau <= t:
        raise ValueError(f"period must satisfy 1 <= tau <= t, got tau={tau}, t={t}")
    diff = series - np.roll(series, -tau, axis=0)
    per_sample = np.sqrt((diff.reshape(t, -1) ** 2).sum(axis=1))
    return float(per_sample.max())


def rank_r_error(y: np.ndarray, r: int) -> float:
    """Distance from ``y`` to the closest tensor of tubal rank <= r."""
    return truncation_error(y, r)


def smoothness_bound(series: np.ndarray, k: int, r: int) -> float:
    """Low-rankness guarantee from temporal smoothness: an upper bound on the
    rank-r approximation error of the convolution tensor."""
    series = check_series(series)
    t = series.shape[0]
    k = check_kernel_size(k, t)
    if r < 1:
        raise ValueError(f"rank must be >= 1, got {r}")
    return float(np.sqrt(t * (k + r) / 3.0) * math.ceil(k / r) * smoothness_eta(series))


def periodicity_bound(series: np.ndarray, k: int, tau: int) -> float:
    """Low-rankness guarantee from temporal periodicity: an upper bound on the
    rank-tau approximation error of the convolution tensor."""
    series = check_series(series)
    t = series.shape[0]
    k = check_kernel_size(k, t)
    if not 1 <= tau <= t:
        raise ValueError(f"period must satisfy 1 <= tau <= t, got tau={tau}, t={t}")
    return float(tau * t * (math.ceil(k / tau) - 1) * periodicity_beta(series, tau))


__all__ = [
    "INVERSE_MODES",
    "check_series",
    "check_kernel_size",
    "default_kernel_size",
    "temporal_circular_conv",
    "conv_tensor",
    "conv_inverse",
    "conv_sampling_mask",
    "smoothness_eta",
    "periodicity_beta",
    "rank_r_error",
    "smoothness_bound",
    "periodicity_bound",
]
