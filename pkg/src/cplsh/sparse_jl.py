"""Sparse sign-matrix JL transform with k-wise independent polynomial hashing.

The m output coordinates are split into ``sparsity`` blocks; every input
coordinate receives exactly one +-1/sqrt(s) entry per block, at a position
chosen by a degree-(k-1) polynomial hash over a prime field.  Two
polynomials (positions and signs) are the only random input, so the seed
cost is exactly 2 * k * ceil(log2 p) bits, which a ledger records under the
label "sparse-jl".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .ledger import RandomnessLedger
from .rng import DOMAIN_SPARSE_JL, derive_rng

LEDGER_LABEL = "sparse-jl"


def _is_prime_odd(n: int) -> bool:
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def smallest_prime_at_least(n: int) -> int:
    """First prime >= n (trial division; intended for n up to ~2^32)."""
    n = max(2, int(n))
    if n == 2:
        return 2
    if n % 2 == 0:
        n += 1
    while not _is_prime_odd(n):
        n += 2
    return n


def default_sparsity(d: int, m: int) -> int:
    """ceil(ln^2 d) capped at m; a pragmatic default, not a tuned constant."""
    return max(1, min(int(m), math.ceil(math.log(max(d, 2)) ** 2)))


def _poly_eval_mod(coeffs: np.ndarray, keys: np.ndarray, prime: int) -> np.ndarray:
    """Horner evaluation of the polynomial at keys, all mod prime (uint64 safe)."""
    p = np.uint64(prime)
    acc = np.full(keys.shape, coeffs[-1], dtype=np.uint64)
    for c in coeffs[-2::-1]:
        acc = (acc * keys + np.uint64(c)) % p
    return acc


def _block_layout(m: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and sizes of s contiguous blocks covering [0, m)."""
    base, rem = divmod(m, s)
    sizes = np.full(s, base, dtype=np.int64)
    sizes[:rem] += 1
    offsets = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    return offsets, sizes


@dataclass(eq=False)
class SparseJl:
    """Realized sparse JL transform: s nonzeros of weight +-1/sqrt(s) per column."""

    input_dim: int
    output_dim: int
    sparsity: int
    prime: int
    rows: np.ndarray = field(repr=False)    # (d, s) target rows, one per block
    signs: np.ndarray = field(repr=False)   # (d, s) values in {-1.0, +1.0}
    seed_bits: int = 0

    def __post_init__(self):
        if self.rows.shape != (self.input_dim, self.sparsity):
            raise DimensionError("rows array shape mismatch")
        if self.signs.shape != self.rows.shape:
            raise DimensionError("signs array shape mismatch")


def build_sparse_jl(d: int, m: int, s: int | None = None, k: int = 4,
                    seed: int = 0, ledger: RandomnessLedger | None = None,
                    rng: np.random.Generator | None = None) -> SparseJl:
    """Draw a sparse JL transform from 2k field coefficients.

    Positions and signs for coordinate i in block j come from evaluating the
    two polynomials at key (i*s + j) mod p.  Because p >= max(d, 2m) >= d,
    keys within one block are distinct field points, which is what the
    mean-isometry property needs.  When ``rng`` is omitted the generator is
    derived from ``seed``.
    """
    d, m, k = int(d), int(m), int(k)
    if d < 1 or m < 1:
        raise ParameterError("dimensions must be positive")
    if s is None:
        s = default_sparsity(d, m)
    s = int(s)
    if not 1 <= s <= m:
        raise ParameterError(f"sparsity s={s} must lie in [1, m={m}]")
    if k < 2:
        raise ParameterError("k-wise independence requires k >= 2")
    prime = smallest_prime_at_least(max(d, 2 * m))
    if rng is None:
        rng = derive_rng(seed, DOMAIN_SPARSE_JL)
    pos_coeffs = rng.integers(0, prime, size=k, dtype=np.uint64)
    sign_coeffs = rng.integers(0, prime, size=k, dtype=np.uint64)
    bits_per_coeff = (prime - 1).bit_length()
    seed_bits = 2 * k * bits_per_coeff
    if ledger is not None:
        ledger.record(LEDGER_LABEL, seed_bits)

    keys = (np.arange(d, dtype=np.uint64)[:, None] * np.uint64(s)
            + np.arange(s, dtype=np.uint64)[None, :]) % np.uint64(prime)
    offsets, sizes = _block_layout(m, s)
    pos = _poly_eval_mod(pos_coeffs, keys, prime).astype(np.int64)
    rows = offsets[None, :] + pos % sizes[None, :]
    sign_bits = _poly_eval_mod(sign_coeffs, keys, prime).astype(np.int64) & 1
    signs = 1.0 - 2.0 * sign_bits
    return SparseJl(input_dim=d, output_dim=m, sparsity=s, prime=prime,
                    rows=rows, signs=signs, seed_bits=seed_bits)


def apply_sparse_jl(z: SparseJl, x) -> np.ndarray:
    """y_r = (1/sqrt(s)) * sum of sign(i, j) * x_i over entries mapped to row r."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != z.input_dim:
        raise DimensionError(f"expected a vector of length {z.input_dim}")
    contrib = (z.signs * x[:, None]).ravel()
    y = np.bincount(z.rows.ravel(), weights=contrib, minlength=z.output_dim)
    return y / math.sqrt(z.sparsity)


def apply_sparse_jl_batch(z: SparseJl, X: np.ndarray) -> np.ndarray:
    """Row-wise apply_sparse_jl for an (n, d) array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != z.input_dim:
        raise DimensionError(f"expected rows of length {z.input_dim}")
    out = np.empty((X.shape[0], z.output_dim))
    flat_rows = z.rows.ravel()
    scale = 1.0 / math.sqrt(z.sparsity)
    for i in range(X.shape[0]):
        contrib = (z.signs * X[i][:, None]).ravel()
        out[i] = np.bincount(flat_rows, weights=contrib, minlength=z.output_dim)
    out *= scale
    return out
