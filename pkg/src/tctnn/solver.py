"""ADMM solvers for nuclear-norm completion models and the forecast wrapper.

All three models share one skeleton: an auxiliary variable holds a transform
of the iterate, a singular-value-thresholding prox shrinks it, the data
projection re-imposes the observed entries exactly, and the multiplier plus a
geometric penalty schedule drive the two together. The models differ only in
the transform (identity, temporal convolution tensor, or stacked per-fiber
circulant matrix) and in whether the prox is tensor or matrix thresholding.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .sampling import SamplingMask, prediction_mask, project
from .temporal_conv import (
    check_kernel_size,
    check_series,
    conv_inverse,
    conv_tensor,
    default_kernel_size,
)
from .tensor_core import frobenius_norm
from .tsvd import t_svt, tnn

# Penalty growth is capped: past 1/mu ~ 1e-8 the threshold underflows the
# singular-value scale and further growth only destabilizes the multiplier.
MU_CAP = 1e8

# Declaring convergence additionally requires the auxiliary variable to track
# the transform of the iterate. With mu0 = 1e-5 the first dozens of prox steps
# shrink everything to zero and the iterate does not move at all, so the
# relative-change metric alone would stop at iteration 1.
FEASIBILITY_RTOL = 1e-6


@dataclass
class AdmmConfig:
    mu0: float = 1e-5
    growth: float = 1.1
    max_iters: int = 500
    rel_tol: float = 1e-8
    kernel_k: int | str = "auto"
    inverse_mode: str = "scaled-adjoint"
    mu_cap: float = MU_CAP

    def __post_init__(self):
        if self.mu0 <= 0:
            raise ValueError(f"mu0 must be > 0, got {self.mu0}")
        if self.growth <= 1:
            raise ValueError(f"growth must be > 1, got {self.growth}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.rel_tol <= 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.kernel_k != "auto" and int(self.kernel_k) < 1:
            raise ValueError(f"kernel_k must be 'auto' or a positive integer, got {self.kernel_k}")
        if self.inverse_mode not in ("scaled-adjoint", "first-slice"):
            raise ValueError(f"unknown inverse_mode {self.inverse_mode!r}")
        if self.mu_cap < self.mu0:
            raise ValueError("mu_cap must be >= mu0")

    def resolve_kernel(self, t: int) -> int:
        if self.kernel_k == "auto":
            return default_kernel_size(t)
        return check_kernel_size(int(self.kernel_k), t)

    def echo(self, **extra) -> dict:
        out = {
            "mu0": self.mu0,
            "growth": self.growth,
            "max_iters": self.max_iters,
            "rel_tol": self.rel_tol,
            "kernel_k": self.kernel_k,
            "inverse_mode": self.inverse_mode,
            "mu_cap": self.mu_cap,
        }
        out.update(extra)
        return out


@dataclass
class SolveReport:
    iterations: int
    rel_changes: list[float]
    feasibility_gap: float
    objective: float
    converged: bool
    wall_time_s: float
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "iterations": self.iterations,
            "converged": self.converged,
            "objective": self.objective,
            "feasibility_gap": self.feasibility_gap,
            "rel_changes": self.rel_changes,
            "wall_time_ms": self.wall_time_s * 1000.0,
            "config": self.config,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _identity(z):
    return z


def _check_observed(observed: np.ndarray, mask: SamplingMask) -> None:
    if observed.shape != mask.shape:
        raise ValueError(f"shape mismatch: observed {observed.shape} vs mask {mask.shape}")
    if not np.isfinite(observed).all():
        raise ValueError("observed tensor must be finite")
    if mask.total_count == 0:
        raise ValueError("mask has no sampled entries")


def _admm_complete(observed, mask, cfg, fwd, inv, prox, objective, config_echo):
    """Shared ADMM loop. ``fwd``/``inv`` map the iterate to and from the
    auxiliary domain, ``prox`` shrinks there, ``objective`` scores the final
    auxiliary variable."""
    start = time.perf_counter()
    pom = project(mask, observed)
    tiny = np.finfo(np.float64).tiny

    if mask.total_count == mask.indicator.size:
        # Fully observed: the feasible set is a single point.
        y = fwd(pom)
        return pom.copy(), SolveReport(
            iterations=0,
            rel_changes=[],
            feasibility_gap=0.0,
            objective=objective(y),
            converged=True,
            wall_time_s=time.perf_counter() - start,
            config=config_echo,
        )

    comp = 1.0 - mask.indicator
    x = pom.copy()
    n = np.zeros_like(fwd(x))
    mu = cfg.mu0
    rel_changes: list[float] = []
    converged = False

    gap = float("inf")
    for _ in range(cfg.max_iters):
        tx = fwd(x)
        y = prox(tx - n / mu, 1.0 / mu)
        x_new = pom + comp * inv(y + n / mu)
        tx_new = fwd(x_new)
        n = n + mu * (y - tx_new)
        rel = frobenius_norm(x_new - x) / max(frobenius_norm(x), tiny)
        rel_changes.append(rel)
        x = x_new
        mu = min(mu * cfg.growth, cfg.mu_cap)
        gap = frobenius_norm(y - tx_new)
        if rel <= cfg.rel_tol and gap <= FEASIBILITY_RTOL * max(frobenius_norm(tx_new), tiny):
            converged = True
            break

    report = SolveReport(
        iterations=len(rel_changes),
        rel_changes=rel_changes,
        feasibility_gap=gap,
        objective=objective(y),
        converged=converged,
        wall_time_s=time.perf_counter() - start,
        config=config_echo,
    )
    return x, report


def solve_tnn(observed: np.ndarray, mask: SamplingMask, cfg: AdmmConfig | None = None):
    """Complete a tensor by tensor nuclear norm minimization subject to exact
    agreement with the observed entries."""
    cfg = cfg or AdmmConfig()
    observed = np.asarray(observed, dtype=np.float64)
    if observed.ndim < 3:
        raise ValueError(f"tnn completion requires tensor order >= 3, got {observed.ndim}")
    _check_observed(observed, mask)
    return _admm_complete(
        observed, mask, cfg,
        fwd=_identity, inv=_identity, prox=t_svt, objective=tnn,
        config_echo=cfg.echo(model="tnn"),
    )


def solve_tctnn(observed: np.ndarray, mask: SamplingMask, cfg: AdmmConfig | None = None):
    """Complete a time series by minimizing the tensor nuclear norm of its
    temporal convolution tensor (the TCTNN model)."""
    cfg = cfg or AdmmConfig()
    observed = check_series(np.asarray(observed, dtype=np.float64))
    _check_observed(observed, mask)
    t = observed.shape[0]
    k = cfg.resolve_kernel(t)
    return _admm_complete(
        observed, mask, cfg,
        fwd=lambda z: conv_tensor(z, k),
        inv=lambda y: conv_inverse(y, mode=cfg.inverse_mode),
        prox=t_svt,
        objective=tnn,
        config_echo=cfg.echo(model="tctnn", kernel=k),
    )


def _stacked_circulant(series: np.ndarray, k: int) -> np.ndarray:
    """Per-fiber t x k time circulants stacked vertically: (n*t) x k."""
    t = series.shape[0]
    fibers = series.reshape(t, -1).T
    idx = (np.arange(t)[:, None] - np.arange(k)[None, :]) % t
    return fibers[:, idx].reshape(-1, k)


def _stacked_circulant_inverse(mat: np.ndarray, shape: tuple, k: int, mode: str) -> np.ndarray:
    t = shape[0]
    blocks = mat.reshape(-1, t, k)
    if mode == "first-slice":
        fibers = blocks[:, :, 0]
    else:
        rows = (np.arange(t)[:, None] + np.arange(k)[None, :]) % t
        cols = np.broadcast_to(np.arange(k), (t, k))
        fibers = blocks[:, rows, cols].mean(axis=2)
    return fibers.T.reshape(shape)


def _matrix_svt(mat: np.ndarray, tau: float) -> np.ndarray:
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    return (u * np.maximum(s - tau, 0.0)[None, :]) @ vh


def _matrix_nuclear(mat: np.ndarray) -> float:
    return float(np.linalg.svd(mat, compute_uv=False).sum())


def solve_tcmnn(observed: np.ndarray, mask: SamplingMask, cfg: AdmmConfig | None = None):
    """Matrix ablation of TCTNN: same ADMM, but the auxiliary variable is the
    stacked per-fiber circulant matrix and the prox is matrix thresholding,
    discarding the tensor structure across feature modes."""
    cfg = cfg or AdmmConfig()
    observed = check_series(np.asarray(observed, dtype=np.float64))
    _check_observed(observed, mask)
    t = observed.shape[0]
    k = cfg.resolve_kernel(t)
    shape = observed.shape
    return _admm_complete(
        observed, mask, cfg,
        fwd=lambda z: _stacked_circulant(z, k),
        inv=lambda y: _stacked_circulant_inverse(y, shape, k, cfg.inverse_mode),
        prox=_matrix_svt,
        objective=_matrix_nuclear,
        config_echo=cfg.echo(model="tcmnn", kernel=k),
    )


@dataclass
class ForecastResult:
    prediction: np.ndarray
    completed: np.ndarray
    report: SolveReport


def forecast(history: np.ndarray, h: int, cfg: AdmmConfig | None = None) -> ForecastResult:
    """Predict the next ``h`` samples of a series.

    Appends h zero samples, marks them missing under the prediction mask, runs
    the TCTNN completion, and extracts the trailing h samples of the result.
    """
    cfg = cfg or AdmmConfig()
    history = check_series(np.asarray(history, dtype=np.float64))
    if h < 1:
        raise ValueError(f"horizon must be >= 1, got {h}")
    t = history.shape[0] + h
    trailing = history.shape[1:]
    cfg.resolve_kernel(t)  # fail fast on an oversized explicit kernel
    padded = np.concatenate([history, np.zeros((h,) + trailing)], axis=0)
    mask = prediction_mask(t, h, trailing)
    completed, report = solve_tctnn(padded, mask, cfg)
    return ForecastResult(
        prediction=np.ascontiguousarray(completed[t - h:]),
        completed=completed,
        report=report,
    )


__all__ = [
    "AdmmConfig",
    "SolveReport",
    "ForecastResult",
    "solve_tnn",
    "solve_tctnn",
    "solve_tcmnn",
    "forecast",
    "MU_CAP",
    "FEASIBILITY_RTOL",
]
