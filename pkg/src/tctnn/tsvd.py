"""Tensor-tensor product algebra built on trailing-mode DFTs.

An order-d tensor (d >= 3) is treated as an m1 x m2 matrix of tubes living on
the trailing modes 3..d. All products, factorizations, norms, and proximal
steps reduce to independent matrix operations on the Fourier-domain face
slices. Convention: forward DFT unnormalized, inverse carries 1/mj per mode,
so the tensor nuclear norm is (1/m) * sum of all face singular values with
m = m3*...*md.

Real inputs have conjugate-symmetric Fourier faces: the face at trailing
multi-index (i3,...,id) is the conjugate of the face at (-i3,...,-id) mod the
extents. Facewise SVD work is done once per conjugate pair and mirrored, which
both halves the work and keeps the returned factors exactly real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import trailing_count

IMAG_RESIDUE_RTOL = 1e-9


@dataclass
class TSvdFactors:
    """Factors of a tensor SVD: x = u * s * v^T under the t-product.

    ``s`` is f-diagonal (every face slice diagonal, nonincreasing along the
    diagonal in each Fourier face). ``multi_rank[i]`` is the matrix rank of the
    i-th Fourier face; ``tubal_rank`` is their maximum.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    tubal_rank: int
    multi_rank: np.ndarray


def _require_order3(a: np.ndarray, op: str) -> None:
    if a.ndim < 3:
        raise ValueError(f"{op} requires tensor order >= 3, got order {a.ndim}")


def dft_trailing(a: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT along every mode after the first two."""
    _require_order3(a, "dft_trailing")
    return np.fft.fftn(a, axes=tuple(range(2, a.ndim)))


def idft_trailing(abar: np.ndarray) -> np.ndarray:
    """Inverse trailing-mode DFT; asserts the result is real and discards
    the rounding-level imaginary residue.

    A large residue means the input was not conjugate-symmetric, i.e. it did
    not come from transforming a real tensor, which is a logic bug upstream.
    """
    _require_order3(abar, "idft_trailing")
    out = np.fft.ifftn(abar, axes=tuple(range(2, abar.ndim)))
    imag_norm = np.linalg.norm(out.imag.ravel())
    full_norm = np.linalg.norm(out.ravel())
    if imag_norm > IMAG_RESIDUE_RTOL * max(full_norm, np.finfo(np.float64).tiny):
        raise ValueError(
            f"imaginary residue {imag_norm:.3e} exceeds {IMAG_RESIDUE_RTOL:.0e} "
            f"of result norm {full_norm:.3e}; input is not conjugate-symmetric"
        )
    return np.ascontiguousarray(out.real)


def _faces(abar: np.ndarray) -> np.ndarray:
    """(m1, m2, m3, ..., md) -> batch (m3*...*md, m1, m2), C-order batch index."""
    m1, m2 = abar.shape[0], abar.shape[1]
    return np.moveaxis(abar.reshape(m1, m2, -1), -1, 0)


def _unfaces(faces: np.ndarray, trailing_shape: tuple[int, ...]) -> np.ndarray:
    b, m1, m2 = faces.shape
    return np.moveaxis(faces, 0, -1).reshape((m1, m2) + trailing_shape)


def _mirror_indices(trailing_shape: tuple[int, ...]) -> np.ndarray:
    """Flat index of the conjugate partner face for each flat face index."""
    count = int(np.prod(trailing_shape)) if trailing_shape else 1
    multi = np.unravel_index(np.arange(count), trailing_shape)
    mirrored = tuple((-ix) % m for ix, m in zip(multi, trailing_shape))
    return np.ravel_multi_index(mirrored, trailing_shape)


def _facewise_svd(faces: np.ndarray, mirror: np.ndarray, full_matrices: bool = False):
    """SVD of every face, computed once per conjugate pair.

    Self-paired faces are real (up to FFT rounding) and go through the real
    LAPACK path so their factors carry no spurious phases. Returns complex
    (u, s, vh) arrays covering all faces, exactly conjugate-symmetric.
    """
    count, m1, m2 = faces.shape
    idx = np.arange(count)
    self_idx = idx[idx == mirror]
    pair_idx = idx[idx < mirror]

    kcols = min(m1, m2)
    ushape = (count, m1, m1 if full_matrices else kcols)
    vshape = (count, m2 if full_matrices else kcols, m2)
    u = np.empty(ushape, dtype=np.complex128)
    s = np.empty((count, kcols), dtype=np.float64)
    vh = np.empty(vshape, dtype=np.complex128)

    if self_idx.size:
        ur, sr, vr = np.linalg.svd(faces[self_idx].real, full_matrices=full_matrices)
        u[self_idx], s[self_idx], vh[self_idx] = ur, sr, vr
    if pair_idx.size:
        uc, sc, vc = np.linalg.svd(faces[pair_idx], full_matrices=full_matrices)
        u[pair_idx], s[pair_idx], vh[pair_idx] = uc, sc, vc
        u[mirror[pair_idx]] = uc.conj()
        s[mirror[pair_idx]] = sc
        vh[mirror[pair_idx]] = vc.conj()
    return u, s, vh


def _face_singular_values(a: np.ndarray) -> np.ndarray:
    """Singular values of every Fourier face, shape (m3*...*md, min(m1, m2))."""
    _require_order3(a, "facewise singular values")
    faces = _faces(dft_trailing(a))
    mirror = _mirror_indices(a.shape[2:])
    idx = np.arange(faces.shape[0])
    canon = idx[idx <= mirror]
    s = np.empty((faces.shape[0], min(a.shape[0], a.shape[1])), dtype=np.float64)
    s[canon] = np.linalg.svd(faces[canon], compute_uv=False)
    s[mirror[canon]] = s[canon]
    return s


def _rank_thresholds(sigma: np.ndarray, m1: int, m2: int) -> np.ndarray:
    # standard numerical-rank rule, per face: dim * eps * sigma_max
    return max(m1, m2) * np.finfo(np.float64).eps * sigma[:, 0]


def multi_rank(a: np.ndarray) -> np.ndarray:
    """Matrix rank of each Fourier face, as a vector of length m3*...*md."""
    sigma = _face_singular_values(a)
    tol = _rank_thresholds(sigma, a.shape[0], a.shape[1])
    return (sigma > tol[:, None]).sum(axis=1)


def tubal_rank(a: np.ndarray) -> int:
    return int(multi_rank(a).max())


def multi_rank_sum(a: np.ndarray) -> int:
    return int(multi_rank(a).sum())


def tnn(a: np.ndarray) -> float:
    """Tensor nuclear norm: mean over trailing extents of face nuclear norms."""
    sigma = _face_singular_values(a)
    return float(sigma.sum() / trailing_count(a.shape))


def spectral_norm(a: np.ndarray) -> float:
    """Largest singular value over all Fourier faces."""
    sigma = _face_singular_values(a)
    return float(sigma.max())


def identity_tensor(m: int, trailing: tuple[int, ...]) -> np.ndarray:
    """Neutral element of the t-product: first face slice I_m, rest zero."""
    if m < 1:
        raise ValueError(f"identity size must be >= 1, got {m}")
    out = np.zeros((m, m) + tuple(trailing), dtype=np.float64)
    first = (slice(None), slice(None)) + (0,) * len(trailing)
    out[first] = np.eye(m)
    return out


def t_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor-tensor product via facewise matrix products in the Fourier domain."""
    _require_order3(a, "t_product")
    if a.ndim != b.ndim:
        raise ValueError(f"order mismatch: {a.ndim} vs {b.ndim}")
    if a.shape[1] != b.shape[0] or a.shape[2:] != b.shape[2:]:
        raise ValueError(f"incompatible shapes for t_product: {a.shape} and {b.shape}")
    af = _faces(dft_trailing(a))
    bf = _faces(dft_trailing(b))
    cf = af @ bf
    return idft_trailing(_unfaces(cf, a.shape[2:]))


def transpose(a: np.ndarray) -> np.ndarray:
    """T-product transpose: swap the first two modes and reverse the order of
    indices 2..mj along every trailing mode (index 1 stays put)."""
    _require_order3(a, "transpose")
    out = np.swapaxes(a, 0, 1)
    for ax in range(2, a.ndim):
        idx = (-np.arange(a.shape[ax])) % a.shape[ax]
        out = np.take(out, idx, axis=ax)
    return np.ascontiguousarray(out)


def t_svd(a: np.ndarray, skinny: bool = False) -> TSvdFactors:
    """Tensor SVD x = u * s * v^T by facewise SVD in the Fourier domain.

    ``skinny`` truncates every face to the tubal rank, giving u of width r and
    an r x r f-diagonal s. Faces whose own rank is below r keep orthonormal
    filler columns from the face SVD, so u^T * u is still the identity.
    """
    _require_order3(a, "t_svd")
    m1, m2 = a.shape[0], a.shape[1]
    trailing = a.shape[2:]
    faces = _faces(dft_trailing(a))
    mirror = _mirror_indices(trailing)

    try:
        ubar, sigma, vhbar = _facewise_svd(faces, mirror, full_matrices=not skinny)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"facewise SVD failed: {exc}") from exc

    tol = _rank_thresholds(sigma, m1, m2)
    ranks = (sigma > tol[:, None]).sum(axis=1)
    rank = int(ranks.max())

    if skinny:
        r = rank
        ubar = ubar[:, :, :r]
        vhbar = vhbar[:, :r, :]
        sfaces = np.zeros((faces.shape[0], r, r), dtype=np.complex128)
        ii = np.arange(r)
        sfaces[:, ii, ii] = sigma[:, :r]
    else:
        kcols = min(m1, m2)
        sfaces = np.zeros((faces.shape[0], m1, m2), dtype=np.complex128)
        ii = np.arange(kcols)
        sfaces[:, ii, ii] = sigma

    u = idft_trailing(_unfaces(ubar, trailing))
    s = idft_trailing(_unfaces(sfaces, trailing))
    vbar = np.conj(np.swapaxes(vhbar, -2, -1))
    v = idft_trailing(_unfaces(vbar, trailing))
    return TSvdFactors(u=u, s=s, v=v, tubal_rank=rank, multi_rank=ranks)


def t_svt(a: np.ndarray, tau: float) -> np.ndarray:
    """Proximal operator of tau * tnn: soft-threshold every Fourier face's
    singular values by tau and transform back.

    The raw face values are thresholded by tau; the 1/m prefactor of the
    nuclear norm cancels against the DFT's Parseval factor, so this is the
    exact minimizer of tau*tnn(y) + 0.5*||y - a||_F^2.
    """
    _require_order3(a, "t_svt")
    if tau < 0:
        raise ValueError(f"threshold must be >= 0, got {tau}")
    faces = _faces(dft_trailing(a))
    mirror = _mirror_indices(a.shape[2:])
    idx = np.arange(faces.shape[0])
    canon = idx[idx <= mirror]
    self_mask = canon == mirror[canon]

    out = np.empty_like(faces)
    for sel, real_path in ((canon[self_mask], True), (canon[~self_mask], False)):
        if not sel.size:
            continue
        block = faces[sel].real if real_path else faces[sel]
        u, s, vh = np.linalg.svd(block, full_matrices=False)
        shrunk = np.maximum(s - tau, 0.0)
        rec = (u * shrunk[:, None, :]) @ vh
        out[sel] = rec
        partner = mirror[sel]
        out[partner] = rec.conj()
    return idft_trailing(_unfaces(out, a.shape[2:]))


def reconstruct(f: TSvdFactors) -> np.ndarray:
    """u * s * v^T, for verifying a factorization."""
    return t_product(t_product(f.u, f.s), transpose(f.v))


def truncation_error(a: np.ndarray, r: int) -> float:
    """Frobenius distance from ``a`` to its best approximation of tubal rank
    <= r (facewise truncation, the Eckart-Young minimizer in this algebra)."""
    if r < 0:
        raise ValueError(f"rank must be >= 0, got {r}")
    sigma = _face_singular_values(a)
    tail = sigma[:, r:] if r < sigma.shape[1] else np.zeros((sigma.shape[0], 0))
    return float(np.sqrt(max((tail ** 2).sum() / trailing_count(a.shape), 0.0)))


__all__ = [
    "TSvdFactors",
    "dft_trailing",
    "idft_trailing",
    "identity_tensor",
    "t_product",
    "transpose",
    "t_svd",
    "t_svt",
    "tubal_rank",
    "multi_rank",
    "multi_rank_sum",
    "tnn",
    "spectral_norm",
    "reconstruct",
    "truncation_error",
]
