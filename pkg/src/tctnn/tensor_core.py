"""Dense tensor helpers, block-circulant reference operators, and the TNSR file format.

Tensors are plain ``numpy.ndarray`` objects: float64, C-contiguous (row-major,
last index fastest). Fourier-domain tensors are complex128 with the same layout.
The block-circulant operators (``bcirc``/``bunfold``/``bfold``) materialize the
full circulant matrix and are meant as small-instance oracles for testing, not
as a compute path; they refuse to build outputs above ``BCIRC_MAX_ELEMENTS``.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Sequence

import numpy as np

# Materialized block circulants grow as (m1*m3*...*md) x (m2*m3*...*md); past
# ~1e6 entries they stop being a sensible oracle and start being a memory bug.
BCIRC_MAX_ELEMENTS = 10**6

# Largest tensor the library will allocate (entries, not bytes).
MAX_ELEMENTS = 2**40

TNSR_MAGIC = b"TNSR"
TNSR_VERSION = 1


class TensorSizeError(ValueError):
    """Requested tensor would exceed the supported element count."""


class TensorFormatError(ValueError):
    """A TNSR/CSV payload is malformed; ``offset`` points at the first bad byte."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (offset {offset})")
        self.offset = offset


def check_shape(dims: Sequence[int]) -> tuple[int, ...]:
    """Validate tensor extents: order >= 2, every extent >= 1, bounded size."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ValueError(f"tensor order must be >= 2, got {len(dims)}")
    if any(d < 1 for d in dims):
        raise ValueError(f"all extents must be >= 1, got {dims}")
    total = 1
    for d in dims:
        total *= d
        if total > MAX_ELEMENTS:
            raise TensorSizeError(f"element count of shape {dims} exceeds {MAX_ELEMENTS}")
    return dims


def as_tensor(data, shape: Sequence[int] | None = None) -> np.ndarray:
    """Coerce to a float64 C-order tensor, rejecting NaN/Inf entries."""
    a = np.ascontiguousarray(data, dtype=np.float64)
    if shape is not None:
        a = a.reshape(check_shape(shape))
    else:
        check_shape(a.shape)
    if not np.isfinite(a).all():
        raise ValueError("tensor entries must be finite")
    return a


def zeros(shape: Sequence[int]) -> np.ndarray:
    return np.zeros(check_shape(shape), dtype=np.float64)


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise product; shapes must match exactly."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a.ravel()))


def trailing_count(shape: Sequence[int]) -> int:
    """Product of the trailing extents m3*...*md (1 for order-2)."""
    out = 1
    for d in shape[2:]:
        out *= int(d)
    return out


def _circ_once(a: np.ndarray) -> np.ndarray:
    """One circulant layer along the current last mode.

    Maps (m1, m2, m3, ..., md) to (m1*md, m2*md, m3, ..., md-1) with block
    (i, j) holding the face a[..., (i - j) % md].
    """
    md = a.shape[-1]
    # rows of blocks: block row i, block col j -> slice (i - j) mod md
    rows = []
    for i in range(md):
        cols = [a[..., (i - j) % md] for j in range(md)]
        rows.append(np.concatenate(cols, axis=1))
    return np.concatenate(rows, axis=0)


def bcirc(a: np.ndarray) -> np.ndarray:
    """Materialized block-circulant matrix of an order-d tensor (d >= 3).

    Result is the (m1*m3*...*md) x (m2*m3*...*md) matrix obtained by applying
    the circulant layout recursively to every trailing mode, outermost last.
    """
    if a.ndim < 3:
        raise ValueError(f"bcirc requires order >= 3, got order {a.ndim}")
    m1, m2 = a.shape[0], a.shape[1]
    m = trailing_count(a.shape)
    if (m1 * m) * (m2 * m) > BCIRC_MAX_ELEMENTS:
        raise TensorSizeError(
            f"bcirc output {(m1 * m, m2 * m)} exceeds {BCIRC_MAX_ELEMENTS} elements"
        )
    out = a
    while out.ndim > 2:
        out = _circ_once(out)
    return out


def bunfold(a: np.ndarray) -> np.ndarray:
    """Recursive unfold: stacks trailing-mode slices vertically down to a matrix.

    An (m1, m2, m3, ..., md) tensor becomes an (m1*m3*...*md) x m2 matrix whose
    block order matches the first block column of ``bcirc``.
    """
    if a.ndim < 3:
        raise ValueError(f"bunfold requires order >= 3, got order {a.ndim}")
    if a.size > BCIRC_MAX_ELEMENTS:
        raise TensorSizeError(f"bunfold output of {a.size} elements exceeds {BCIRC_MAX_ELEMENTS}")
    out = a
    while out.ndim > 2:
        md = out.shape[-1]
        out = np.concatenate([out[..., i] for i in range(md)], axis=0)
    return out


def bfold(mat: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Inverse of ``bunfold`` for the given tensor shape."""
    shape = check_shape(shape)
    if len(shape) < 3:
        raise ValueError(f"bfold requires order >= 3, got order {len(shape)}")
    m1, m2 = shape[0], shape[1]
    m = trailing_count(shape)
    if mat.shape != (m1 * m, m2):
        raise ValueError(f"matrix shape {mat.shape} inconsistent with tensor shape {shape}")
    if mat.size > BCIRC_MAX_ELEMENTS:
        raise TensorSizeError(f"bfold output of {mat.size} elements exceeds {BCIRC_MAX_ELEMENTS}")

    # bunfold stacks mode-d slices first and mode-3 slices last, so the
    # outermost block split of the matrix runs over mode 3.
    def fold(block: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
        if len(dims) == 2:
            return block
        m3 = dims[2]
        rows = block.shape[0] // m3
        rest = dims[:2] + dims[3:]
        inner = [fold(block[i * rows:(i + 1) * rows], rest) for i in range(m3)]
        return np.stack(inner, axis=2)

    return fold(np.asarray(mat, dtype=np.float64), shape)


def save_tensor(a: np.ndarray, path_or_file) -> None:
    """Write a tensor in the TNSR binary format (bit-exact roundtrip)."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    check_shape(a.shape)
    header = TNSR_MAGIC + struct.pack("<BB", TNSR_VERSION, a.ndim)
    header += struct.pack(f"<{a.ndim}Q", *a.shape)
    payload = a.astype("<f8", copy=False).tobytes(order="C")
    if hasattr(path_or_file, "write"):
        path_or_file.write(header + payload)
    else:
        with open(path_or_file, "wb") as fh:
            fh.write(header + payload)


def load_tensor(path_or_file) -> np.ndarray:
    """Read a tensor from the TNSR binary format, validating every field."""
    if hasattr(path_or_file, "read"):
        return _read_tnsr(path_or_file)
    with open(path_or_file, "rb") as fh:
        return _read_tnsr(fh)


def _read_tnsr(fh: BinaryIO) -> np.ndarray:
    magic = fh.read(4)
    if magic != TNSR_MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}, expected {TNSR_MAGIC!r}", offset=0)
    head = fh.read(2)
    if len(head) < 2:
        raise TensorFormatError("truncated header", offset=4)
    version, order = struct.unpack("<BB", head)
    if version != TNSR_VERSION:
        raise TensorFormatError(f"unsupported version {version}", offset=4)
    if order < 2:
        raise TensorFormatError(f"order must be >= 2, got {order}", offset=5)
    raw = fh.read(8 * order)
    if len(raw) < 8 * order:
        raise TensorFormatError("truncated extent list", offset=6)
    dims = struct.unpack(f"<{order}Q", raw)
    try:
        dims = check_shape(dims)
    except ValueError as exc:
        raise TensorFormatError(str(exc), offset=6) from exc
    count = int(np.prod(dims, dtype=np.int64))
    payload = fh.read(8 * count)
    if len(payload) < 8 * count:
        raise TensorFormatError(
            f"truncated payload: expected {8 * count} bytes, got {len(payload)}",
            offset=6 + 8 * order + len(payload),
        )
    data = np.frombuffer(payload, dtype="<f8", count=count).astype(np.float64)
    return data.reshape(dims)
