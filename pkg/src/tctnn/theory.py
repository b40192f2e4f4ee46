"""Exact-recovery and exact-prediction diagnostics.

These evaluate, on a concrete instance, the quantities that the recovery
guarantees are stated in: the coherence of the singular factors, the minimum
sub-tensor sampling ratio of a mask, and the largest forecast horizon the
prediction guarantee certifies. They diagnose instances; they prove nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import SamplingMask, min_sampling_ratio
from .temporal_conv import check_kernel_size, check_series, conv_tensor
from .tensor_core import frobenius_norm
from .tsvd import _faces, dft_trailing, t_svd


@dataclass
class IncoherenceReport:
    """Tightest coherence parameter of a tensor's singular factors.

    ``per_row_leverage[i]`` is the Frobenius norm of the i-th mode-1 basis
    contraction against the left factor (and likewise per column for the right
    factor); ``mu`` rescales the worst leverage so a factor whose mass is
    spread evenly over rows and columns scores 1 and a factor concentrated on
    a single horizontal sub-tensor scores m1.
    """

    mu: float
    tubal_rank: int
    multi_rank_sum: int
    per_row_leverage: np.ndarray
    per_col_leverage: np.ndarray


@dataclass
class RecoveryCheck:
    satisfied: bool
    lhs: float
    rhs: float
    incoherence: IncoherenceReport


@dataclass
class HorizonReport:
    h_max: int
    mu_T: float
    r_T: int
    rs_T: int
    bound: float
    kernel: int


def _factor_leverages(factor: np.ndarray) -> np.ndarray:
    """Per-row spatial norms of basis contractions against an orthogonal
    factor, computed as mean squared row norms over its Fourier faces."""
    faces = _faces(dft_trailing(factor))
    lev_sq = (np.abs(faces) ** 2).sum(axis=2).mean(axis=0)
    return np.sqrt(lev_sq)


def incoherence_mu(a: np.ndarray) -> IncoherenceReport:
    """Evaluate the tightest coherence parameter of ``a``'s skinny t-SVD.

    Leverages are read off facewise in the Fourier domain; contracting the
    factors against literal basis tensors via the t-product gives the same
    numbers and is kept as a test oracle.
    """
    a = np.asarray(a, dtype=np.float64)
    if frobenius_norm(a) == 0.0:
        raise ValueError("incoherence is undefined for the zero tensor")
    factors = t_svd(a, skinny=True)
    r = factors.tubal_rank
    row_lev = _factor_leverages(factors.u)
    col_lev = _factor_leverages(factors.v)
    m1, m2 = a.shape[0], a.shape[1]
    mu = max(m1 * float((row_lev ** 2).max()) / r, m2 * float((col_lev ** 2).max()) / r)
    return IncoherenceReport(
        mu=mu,
        tubal_rank=r,
        multi_rank_sum=int(factors.multi_rank.sum()),
        per_row_leverage=row_lev,
        per_col_leverage=col_lev,
    )


def recovery_threshold(mu: float, r: int, rs: int) -> float:
    """Sampling-ratio threshold above which completion is guaranteed exact."""
    return 1.0 - 1.0 / (2.0 * mu * r * (rs + 1))


def deterministic_recovery_check(mask: SamplingMask, a: np.ndarray) -> RecoveryCheck:
    """Compare a mask's minimum sub-tensor sampling ratio against the exact
    recovery threshold of ``a``. When ``satisfied``, ``a`` is the unique
    nuclear-norm-minimizing completion of its observed entries."""
    if mask.shape != a.shape:
        raise ValueError(f"shape mismatch: mask {mask.shape} vs tensor {a.shape}")
    report = incoherence_mu(a)
    lhs = min_sampling_ratio(mask)
    rhs = recovery_threshold(report.mu, report.tubal_rank, report.multi_rank_sum)
    return RecoveryCheck(satisfied=bool(lhs > rhs), lhs=lhs, rhs=rhs, incoherence=report)


def bernoulli_success_probability(p: float, a: np.ndarray) -> float:
    """Lower bound on the probability that a Bernoulli(p) mask permits exact
    recovery of ``a``; 0 when the bound is vacuous."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    report = incoherence_mu(a)
    gap = p - recovery_threshold(report.mu, report.tubal_rank, report.multi_rank_sum)
    if gap <= 0.0:
        return 0.0
    m0 = a.size
    return float(1.0 - math.exp(-4.0 * gap * gap * m0))


def max_exact_horizon(series: np.ndarray, k: int) -> HorizonReport:
    """Largest forecast horizon certified exactly predictable for this series.

    Builds the temporal convolution tensor, evaluates its coherence and ranks,
    and returns the largest integer h strictly below k / (2 mu r (rs + 1)),
    floored at 0. The bound is conservative: solves often predict accurately
    beyond it.
    """
    series = check_series(series)
    k = check_kernel_size(k, series.shape[0])
    conv = conv_tensor(series, k)
    report = incoherence_mu(conv)
    bound = k / (2.0 * report.mu * report.tubal_rank * (report.multi_rank_sum + 1))
    h_max = max(0, math.ceil(bound) - 1)
    return HorizonReport(
        h_max=h_max,
        mu_T=report.mu,
        r_T=report.tubal_rank,
        rs_T=report.multi_rank_sum,
        bound=bound,
        kernel=k,
    )


__all__ = [
    "IncoherenceReport",
    "RecoveryCheck",
    "HorizonReport",
    "incoherence_mu",
    "recovery_threshold",
    "deterministic_recovery_check",
    "bernoulli_success_probability",
    "max_exact_horizon",
]
