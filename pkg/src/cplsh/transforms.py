"""Orthogonal-transform building blocks.

In-place fast Walsh-Hadamard transform, Rademacher sign diagonals, random
row subsets, the combined subsampled-Hadamard embedding, and dense Gaussian
lift matrices.  The Hadamard matrix used throughout is the unnormalized one
with entries H[i, j] = (-1)^<bits(i), bits(j)>; every scale factor is kept
outside the butterfly so the transform itself is exact integer arithmetic.

All transform objects are immutable once constructed and safe to share
across workers; only fwht_in_place/fwht_rows mutate (their argument), and
sampling needs exclusive use of its generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    if n < 1:
        raise DimensionError(f"dimension must be positive, got {n}")
    return 1 << (int(n) - 1).bit_length()


def _fwht_last_axis(mat: np.ndarray) -> None:
    """Butterfly along the last axis of a C-contiguous 2-d array, in place."""
    n = mat.shape[-1]
    h = 1
    while h < n:
        v = mat.reshape(mat.shape[0], -1, 2, h)
        a = v[..., 0, :]
        b = v[..., 1, :]
        diff = a - b
        a += b
        b[:] = diff
        h *= 2


def fwht_in_place(vec: np.ndarray) -> np.ndarray:
    """Multiply ``vec`` by the d x d +-1 Hadamard matrix, in place.

    Runs the O(d log d) butterfly; d must be a power of two.  Returns the
    mutated input.  Note H H = d I and ||H v|| = sqrt(d) ||v||; callers fold
    any 1/sqrt(d) style normalization in themselves.
    """
    if not isinstance(vec, np.ndarray) or vec.ndim != 1:
        raise DimensionError("fwht_in_place expects a 1-d numpy array")
    if not vec.flags.c_contiguous:
        raise DimensionError("fwht_in_place requires a contiguous array")
    if not is_pow2(vec.shape[0]):
        raise DimensionError(f"length {vec.shape[0]} is not a power of two")
    _fwht_last_axis(vec.reshape(1, -1))
    return vec


def fwht_rows(mat: np.ndarray) -> np.ndarray:
    """In-place FWHT of every row of a C-contiguous 2-d array."""
    if not isinstance(mat, np.ndarray) or mat.ndim != 2:
        raise DimensionError("fwht_rows expects a 2-d numpy array")
    if not mat.flags.c_contiguous:
        raise DimensionError("fwht_rows requires a contiguous array")
    if not is_pow2(mat.shape[1]):
        raise DimensionError(f"row length {mat.shape[1]} is not a power of two")
    _fwht_last_axis(mat)
    return mat


def pad_to_pow2(x) -> np.ndarray:
    """Zero-extend a vector to the next power-of-two length.

    Returns a new float64 array; the Euclidean norm is unchanged because
    only zeros are appended.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] == 0:
        raise DimensionError("pad_to_pow2 expects a nonempty vector")
    out = np.zeros(next_pow2(x.shape[0]))
    out[: x.shape[0]] = x
    return out


@dataclass(frozen=True, eq=False)
class RademacherDiagonal:
    """Diagonal of +-1 signs; applying it twice is the identity."""

    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.float64)
        if s.ndim != 1 or s.size == 0:
            raise DimensionError("signs must be a nonempty vector")
        if not np.all(np.abs(s) == 1.0):
            raise ParameterError("every sign must be exactly +1 or -1")
        s.flags.writeable = False
        object.__setattr__(self, "signs", s)

    def __len__(self) -> int:
        return self.signs.shape[0]

    def apply(self, x) -> np.ndarray:
        return self.signs * np.asarray(x, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class RowSubset:
    """Sorted distinct row indices selecting output coordinates."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size == 0:
            raise DimensionError("indices must be a nonempty vector")
        if idx[0] < 0 or (idx.size > 1 and not np.all(np.diff(idx) > 0)):
            raise ParameterError("indices must be nonnegative and strictly increasing")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True, eq=False)
class FastJlTransform:
    """x -> scale * (H (signs * x)) restricted to a row subset.

    input_dim is the padded (power-of-two) dimension; shorter inputs are
    zero-extended before the butterfly.  scale = 1/sqrt(output_dim), which
    makes the expected squared output norm equal the input's.
    """

    diag: RademacherDiagonal
    rows: RowSubset
    input_dim: int
    output_dim: int
    scale: float

    def __post_init__(self):
        if not is_pow2(self.input_dim):
            raise DimensionError(f"input_dim {self.input_dim} is not a power of two")
        if len(self.diag) != self.input_dim:
            raise DimensionError("diagonal length must equal input_dim")
        if len(self.rows) != self.output_dim:
            raise DimensionError("output_dim must equal the subset size")
        if int(self.rows.indices[-1]) >= self.input_dim:
            raise DimensionError("row index out of range")
        if not (self.scale > 0.0):
            raise ParameterError("scale must be positive")


def sample_fjlt(d: int, m: int, rng: np.random.Generator) -> FastJlTransform:
    """Draw a subsampled-Hadamard transform for raw input dimension d.

    Signs are i.i.d. uniform +-1; the m rows are sampled uniformly without
    replacement from the padded dimension.  Draw order (signs, then rows) is
    fixed so a given generator state always yields the same transform.
    """
    d_pad = next_pow2(d)
    if not 1 <= m <= d_pad:
        raise DimensionError(f"m={m} must lie in [1, {d_pad}] for d={d}")
    signs = rng.integers(0, 2, size=d_pad) * 2.0 - 1.0
    rows = np.sort(rng.choice(d_pad, size=m, replace=False, shuffle=False))
    return FastJlTransform(
        diag=RademacherDiagonal(signs),
        rows=RowSubset(rows),
        input_dim=d_pad,
        output_dim=int(m),
        scale=1.0 / math.sqrt(m),
    )


def apply_fjlt(t: FastJlTransform, x) -> np.ndarray:
    """Apply the transform: one full FWHT, then gather the selected rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] == 0 or x.shape[0] > t.input_dim:
        raise DimensionError(
            f"input length {x.shape if x.ndim != 1 else x.shape[0]} "
            f"incompatible with input_dim {t.input_dim}"
        )
    v = np.zeros(t.input_dim)
    v[: x.shape[0]] = x
    v *= t.diag.signs
    _fwht_last_axis(v.reshape(1, -1))
    return t.scale * v[t.rows.indices]


def apply_fjlt_batch(t: FastJlTransform, X: np.ndarray) -> np.ndarray:
    """Row-wise apply_fjlt for an (n, d) array; returns (n, output_dim)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] == 0 or X.shape[1] > t.input_dim:
        raise DimensionError("batch shape incompatible with the transform")
    V = np.zeros((X.shape[0], t.input_dim))
    V[:, : X.shape[1]] = X
    V *= t.diag.signs
    _fwht_last_axis(V)
    return t.scale * V[:, t.rows.indices]


@dataclass(frozen=True, eq=False)
class DenseGaussian:
    """Dense matrix of i.i.d. standard normal entries."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] == 0 or e.shape[1] == 0:
            raise DimensionError("entries must be a nonempty 2-d array")
        if not np.all(np.isfinite(e)):
            raise ParameterError("entries must be finite")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def sample_dense_gaussian(rows: int, cols: int, rng: np.random.Generator) -> DenseGaussian:
    """Draw a rows x cols matrix of i.i.d. N(0, 1) entries."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"matrix shape ({rows}, {cols}) must be positive")
    return DenseGaussian(rng.standard_normal((int(rows), int(cols))))
