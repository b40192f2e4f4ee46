"""Seeded synthetic series generators for experiments and the desk suite."""

from __future__ import annotations

import math

import numpy as np

from .tensor_core import check_shape
from .tsvd import t_product

KINDS = ("periodic", "smooth", "lowrank")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _smooth_field(feat: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Random positive field varying slowly across the feature grid, built as a
    separable product of low-order cosine profiles per feature axis."""
    field = np.ones(feat)
    for ax, n in enumerate(feat):
        x = np.arange(n)
        prof = rng.uniform(0.6, 1.4) * np.ones(n)
        for q in (1, 2):
            prof = prof + rng.uniform(-0.3, 0.3) * np.cos(
                2.0 * np.pi * q * x / n + rng.uniform(0.0, 2.0 * np.pi)
            )
        shape = [1] * len(feat)
        shape[ax] = n
        field = field * prof.reshape(shape)
    return field


def synth_periodic(shape, tau: int, seed: int, harmonics: int | None = None) -> np.ndarray:
    """Sum of sinusoids with integer period tau per fiber, amplitudes varying
    smoothly across features. One period is sampled and tiled, so the output
    repeats bit-exactly when tau divides t."""
    shape = check_shape(shape)
    t, feat = shape[0], shape[1:]
    if not 1 <= tau <= t:
        raise ValueError(f"period must satisfy 1 <= tau <= t, got tau={tau}, t={t}")
    rng = _rng(seed)
    nh = harmonics if harmonics is not None else max(1, tau // 2)
    grid = np.arange(tau) / tau
    base = _smooth_field(feat, rng) * np.ones((tau,) + feat)
    for j in range(1, nh + 1):
        wave = np.sin(2.0 * np.pi * j * grid + rng.uniform(0.0, 2.0 * np.pi))
        base = base + _smooth_field(feat, rng) * wave.reshape((tau,) + (1,) * len(feat))
    reps = math.ceil(t / tau)
    tiled = np.tile(base, (reps,) + (1,) * len(feat))
    return np.ascontiguousarray(tiled[:t])


def synth_smooth(shape, sigma: float = 0.05, seed: int = 0) -> np.ndarray:
    """Random walk per fiber: cumulative sum of N(0, sigma^2) steps on top of a
    smooth starting field."""
    shape = check_shape(shape)
    if sigma < 0:
        raise ValueError(f"step scale must be >= 0, got {sigma}")
    t, feat = shape[0], shape[1:]
    rng = _rng(seed)
    start = _smooth_field(feat, rng)
    steps = rng.normal(0.0, sigma, size=(t,) + feat)
    steps[0] = 0.0
    return start + np.cumsum(steps, axis=0)


def synth_lowrank(shape, rank: int, seed: int = 0) -> np.ndarray:
    """T-product of random skinny Gaussian factors; tubal rank equals ``rank``
    generically (and never exceeds it)."""
    shape = check_shape(shape)
    if len(shape) < 3:
        raise ValueError(f"lowrank synthesis needs tensor order >= 3, got {len(shape)}")
    t, n1, trailing = shape[0], shape[1], shape[2:]
    if not 1 <= rank <= min(t, n1):
        raise ValueError(f"rank must lie in [1, min(t, n1)] = [1, {min(t, n1)}], got {rank}")
    rng = _rng(seed)
    left = rng.standard_normal((t, rank) + trailing)
    right = rng.standard_normal((rank, n1) + trailing)
    scale = 1.0 / math.sqrt(rank * max(1, int(np.prod(trailing))))
    return scale * t_product(left, right)


def synth_banded(shape, seed: int, taus=(4, 6, 8), noise: float = 0.0) -> np.ndarray:
    """Periodic series whose feature-frequency bands carry distinct temporal
    periods, in the style of climate fields where large spatial scales evolve
    slowly and small scales faster.

    Built in the feature-frequency domain: each conjugate pair of feature
    frequencies gets two harmonics of the period assigned to its band, with
    amplitudes decaying in spatial frequency. Optional white noise is scaled
    by the clean signal's standard deviation.
    """
    shape = check_shape(shape)
    if len(shape) < 3:
        raise ValueError(f"banded synthesis needs tensor order >= 3, got {len(shape)}")
    t, feat = shape[0], shape[1:]
    if any(tau > t or tau < 1 for tau in taus):
        raise ValueError(f"every period must lie in [1, t={t}], got {taus}")
    rng = _rng(seed)
    spectrum = np.zeros((t,) + feat, dtype=np.complex128)
    grid = np.indices(feat)
    freq_mag = sum(np.minimum(g, n - g) ** 2 for g, n in zip(grid, feat)).astype(np.float64)
    order = np.argsort(freq_mag.ravel(), kind="stable")
    bands = np.empty(freq_mag.size, dtype=np.int64)
    bands[order] = (np.arange(freq_mag.size) * len(taus)) // freq_mag.size
    bands = bands.reshape(feat)
    steps = np.arange(t)
    for idx in np.ndindex(feat):
        mirror = tuple((-i) % n for i, n in zip(idx, feat))
        if idx > mirror:
            continue
        tau = taus[bands[idx]]
        amp = math.exp(-1.5 * math.sqrt(freq_mag[idx]) / max(feat)) * rng.uniform(0.5, 1.5)
        pattern = np.zeros(t, dtype=np.complex128)
        for j in (1, 2):
            phase = rng.uniform(0.0, 2.0 * np.pi)
            pattern += (amp / j) * np.exp(1j * (2.0 * np.pi * j * steps / tau + phase))
        spectrum[(slice(None),) + idx] = pattern
        spectrum[(slice(None),) + mirror] = np.conj(pattern)
    series = np.fft.ifftn(spectrum, axes=tuple(range(1, len(shape)))).real
    if noise:
        series = series + rng.normal(0.0, noise * series.std(), size=series.shape)
    return np.ascontiguousarray(series)


def _flat_orthonormal_columns(n: int, r: int, rng: np.random.Generator, real: bool) -> np.ndarray:
    """n x r matrix with orthonormal columns whose entries all have modulus
    1/sqrt(n), so every row norm equals sqrt(r/n) exactly."""
    if real:
        if r == 1:
            cols = rng.choice((-1.0, 1.0), size=(n, 1))
        else:
            if n & (n - 1):
                raise ValueError(f"flat real frames with r >= 2 need a power-of-2 size, got {n}")
            h = np.ones((1, 1))
            while h.shape[0] < n:
                h = np.block([[h, h], [h, -h]])
            pick = rng.choice(n, size=r, replace=False)
            cols = rng.choice((-1.0, 1.0), size=(n, 1)) * h[:, pick]
        return cols / math.sqrt(n)
    pick = rng.choice(n, size=r, replace=False)
    fourier = np.exp(-2j * np.pi * np.outer(np.arange(n), pick) / n)
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(n, 1)))
    return phases * fourier / math.sqrt(n)


def synth_incoherent_lowrank(shape, rank: int, seed: int = 0) -> np.ndarray:
    """Low-tubal-rank tensor whose singular factors have perfectly flat
    leverages (coherence parameter 1, the most incoherent possible).

    Every Fourier face is built as U diag(s) V^H with U, V drawn from flat
    orthonormal frames and s in [1, 2], mirrored conjugately so the result is
    real. For rank >= 2 the first two extents must be powers of 2.
    """
    shape = check_shape(shape)
    if len(shape) < 3:
        raise ValueError(f"lowrank synthesis needs tensor order >= 3, got {len(shape)}")
    m1, m2, trailing = shape[0], shape[1], shape[2:]
    if not 1 <= rank <= min(m1, m2):
        raise ValueError(f"rank must lie in [1, {min(m1, m2)}], got {rank}")
    rng = _rng(seed)
    count = int(np.prod(trailing))
    faces = np.zeros((count, m1, m2), dtype=np.complex128)
    multi = np.unravel_index(np.arange(count), trailing)
    mirror = np.ravel_multi_index(tuple((-ix) % n for ix, n in zip(multi, trailing)), trailing)
    for b in range(count):
        if b > mirror[b]:
            continue
        is_real = b == mirror[b]
        u = _flat_orthonormal_columns(m1, rank, rng, real=is_real)
        v = _flat_orthonormal_columns(m2, rank, rng, real=is_real)
        sigma = np.sort(rng.uniform(1.0, 2.0, size=rank))[::-1]
        face = (u * sigma[None, :]) @ v.conj().T
        faces[b] = face
        faces[mirror[b]] = np.conj(face)
    spectrum = np.moveaxis(faces, 0, -1).reshape((m1, m2) + trailing)
    return np.ascontiguousarray(
        np.fft.ifftn(spectrum, axes=tuple(range(2, len(shape)))).real
    )


def synth(kind: str, shape, seed: int, **params) -> np.ndarray:
    """Dispatch by kind: periodic (tau, harmonics), smooth (sigma), lowrank (rank)."""
    if kind == "periodic":
        tau = params.pop("tau", 4)
        harmonics = params.pop("harmonics", None)
        _reject_extra(kind, params)
        return synth_periodic(shape, tau=tau, seed=seed, harmonics=harmonics)
    if kind == "smooth":
        sigma = params.pop("sigma", 0.05)
        _reject_extra(kind, params)
        return synth_smooth(shape, sigma=sigma, seed=seed)
    if kind == "lowrank":
        rank = params.pop("rank", 2)
        _reject_extra(kind, params)
        return synth_lowrank(shape, rank=rank, seed=seed)
    raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


def _reject_extra(kind: str, params: dict) -> None:
    if params:
        raise ValueError(f"unexpected parameters for kind {kind!r}: {sorted(params)}")


__all__ = [
    "KINDS",
    "synth",
    "synth_periodic",
    "synth_smooth",
    "synth_lowrank",
    "synth_banded",
    "synth_incoherent_lowrank",
]
