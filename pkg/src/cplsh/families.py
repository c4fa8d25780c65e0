"""The four cross-polytope hash families behind one interface.

A hash value is the signed basis vector +-e_i closest (on the unit sphere)
to the transformed input; since ||v/||v|| - u||^2 = 2 - 2 <v, u>/||v|| over
unit vertices u, that argmin is just the largest-magnitude coordinate with
its sign, and no normalization is ever computed.

Families differ only in the rotation applied before the vertex snap:

* dense:    v = G x with a d x d Gaussian G
* fast:     v = G (H_S D x), G lifting from m to d' dimensions
* pseudo:   v = H D3 H D2 H D1 x (three sign flips, three butterflies)
* discrete: v = Ghat (Z x), Ghat quantized to 2^bits atoms, Z either the
  subsampled-Hadamard embedding (default) or the sparse low-randomness JL
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discrete_gaussian import MAX_BITS, build_discrete_gaussian
from .errors import DegenerateInputError, DimensionError, ParameterError
from .ledger import RandomnessLedger
from .rng import DOMAIN_FAMILY, derive_rng
from .sparse_jl import SparseJl, apply_sparse_jl, apply_sparse_jl_batch, build_sparse_jl
from .transforms import (
    FastJlTransform,
    _fwht_last_axis,
    apply_fjlt,
    apply_fjlt_batch,
    next_pow2,
    sample_fjlt,
)

FAMILY_KINDS = ("dense", "fast", "pseudo", "discrete")
MATRIX_LABEL = "discrete-matrix"
RADEMACHER_LABEL = "rademacher"
ROW_SUBSET_LABEL = "row-subset"


@dataclass(frozen=True, order=True)
class HashValue:
    """One of the 2 d' cross-polytope vertices: sign * e_index."""

    index: int
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ParameterError("sign must be -1 or +1")
        if self.index < 0:
            raise ParameterError("index must be nonnegative")


def serialize_hash_value(hv: HashValue) -> int:
    """Signed-integer wire form sign * (index + 1), range +-1 .. +-d'."""
    return hv.sign * (hv.index + 1)


def parse_hash_value(code: int) -> HashValue:
    code = int(code)
    if code == 0:
        raise ParameterError("0 is not a valid serialized hash value")
    return HashValue(abs(code) - 1, 1 if code > 0 else -1)


def nearest_vertex(v) -> HashValue:
    """Closest signed basis vector to v on the unit sphere.

    Equals argmin over u in {+-e_i} of ||v/||v|| - u||; ties go to the
    smallest index (argmax picks the first maximum), and the sign is the
    sign of that coordinate.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError("nearest_vertex expects a nonempty vector")
    if not np.all(np.isfinite(v)):
        raise DimensionError("nearest_vertex requires finite entries")
    idx = int(np.argmax(np.abs(v)))
    val = v[idx]
    if val == 0.0:
        raise DegenerateInputError("the zero vector has no nearest vertex")
    return HashValue(idx, 1 if val > 0 else -1)


def vertex_codes(V: np.ndarray) -> np.ndarray:
    """Serialized nearest-vertex codes for each row of V."""
    idx = np.argmax(np.abs(V), axis=1)
    vals = V[np.arange(V.shape[0]), idx]
    if np.any(vals == 0.0):
        raise DegenerateInputError("a transformed vector is identically zero")
    return np.where(vals > 0, idx + 1, -(idx + 1)).astype(np.int64)


@dataclass(frozen=True)
class HashFamilyConfig:
    """Family kind plus dimensions, bit depth and seed.

    d is the ambient dimension; m the embedded dimension and d_prime the
    lifted dimension (fast/discrete only, with m <= d_prime <= d); bits the
    per-entry depth of the discrete family.  lowrand switches the discrete
    family's embedding from subsampled Hadamard to the sparse JL transform,
    whose knobs are jl_sparsity (None = ceil(ln^2 d) capped at m) and
    jl_indep (the independence order k).
    """

    kind: str
    d: int
    m: int | None = None
    d_prime: int | None = None
    bits: int | None = None
    seed: int = 0
    lowrand: bool = False
    jl_sparsity: int | None = None
    jl_indep: int = 4

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ParameterError(f"unknown family kind {self.kind!r}")
        if self.d < 1:
            raise ParameterError("d must be positive")
        if self.kind in ("dense", "pseudo"):
            if self.m is not None:
                raise ParameterError(f"{self.kind} family takes no embedded dimension m")
            if self.d_prime is None:
                object.__setattr__(self, "d_prime", self.d)
            elif self.d_prime != self.d:
                raise ParameterError(f"{self.kind} family requires d_prime == d")
            if self.bits is not None:
                raise ParameterError(f"{self.kind} family takes no bit depth")
        else:
            if self.m is None:
                raise ParameterError(f"{self.kind} family requires the embedded dimension m")
            if self.d_prime is None:
                object.__setattr__(self, "d_prime", self.d)
            if not self.m <= self.d_prime <= self.d:
                raise ParameterError(
                    f"need m <= d_prime <= d, got m={self.m}, "
                    f"d_prime={self.d_prime}, d={self.d}"
                )
            if self.kind == "discrete":
                if self.bits is None:
                    raise ParameterError("discrete family requires a bit depth")
                if not 1 <= self.bits <= MAX_BITS:
                    raise ParameterError(f"bits must lie in [1, {MAX_BITS}]")
            elif self.bits is not None:
                raise ParameterError("fast family takes no bit depth")
        if self.lowrand and self.kind != "discrete":
            raise ParameterError("lowrand applies to the discrete family only")


def _check_point(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != d:
        raise DimensionError(f"expected a vector of length {d}")
    if not np.all(np.isfinite(x)):
        raise DimensionError("hash input must be finite")
    if not x.any():
        raise DegenerateInputError("the zero vector cannot be hashed")
    return x


def _check_batch(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != d:
        raise DimensionError(f"expected rows of length {d}")
    if not X.any(axis=1).all():
        raise DegenerateInputError("a zero vector cannot be hashed")
    return X


class Hasher:
    """One sampled hash function; immutable, so safe to share across workers."""

    kind: str
    config: HashFamilyConfig

    def _transform(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _transform_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def num_vertices(self) -> int:
        raise NotImplementedError

    def hash(self, x) -> HashValue:
        return nearest_vertex(self._transform(_check_point(x, self.config.d)))

    __call__ = hash

    def hash_code(self, x) -> int:
        return serialize_hash_value(self.hash(x))

    def hash_batch(self, X) -> np.ndarray:
        """Serialized hash codes for every row of X."""
        return vertex_codes(self._transform_batch(_check_batch(X, self.config.d)))


@dataclass(frozen=True, eq=False)
class DenseHasher(Hasher):
    config: HashFamilyConfig
    matrix: np.ndarray  # (d, d) i.i.d. N(0, 1)
    kind = "dense"

    @property
    def num_vertices(self) -> int:
        return self.matrix.shape[0]

    def _transform(self, x):
        return self.matrix @ x

    def _transform_batch(self, X):
        return X @ self.matrix.T


@dataclass(frozen=True, eq=False)
class FastHasher(Hasher):
    config: HashFamilyConfig
    fjlt: FastJlTransform
    lift: np.ndarray  # (d_prime, m) i.i.d. N(0, 1)
    kind = "fast"

    @property
    def num_vertices(self) -> int:
        return self.lift.shape[0]

    def _transform(self, x):
        return self.lift @ apply_fjlt(self.fjlt, x)

    def _transform_batch(self, X):
        return apply_fjlt_batch(self.fjlt, X) @ self.lift.T


@dataclass(frozen=True, eq=False)
class PseudoHasher(Hasher):
    """Three Rademacher flips interleaved with three full butterflies.

    With a non power-of-two ambient dimension the input is zero-padded, so
    hash indices range over the padded dimension.
    """

    config: HashFamilyConfig
    signs: np.ndarray  # (3, padded d), rows applied first to last
    kind = "pseudo"

    @property
    def num_vertices(self) -> int:
        return self.signs.shape[1]

    def _transform(self, x):
        v = np.zeros(self.signs.shape[1])
        v[: x.shape[0]] = x
        for row in self.signs:
            v = row * v
            _fwht_last_axis(v.reshape(1, -1))
        return v

    def _transform_batch(self, X):
        V = np.zeros((X.shape[0], self.signs.shape[1]))
        V[:, : X.shape[1]] = X
        for row in self.signs:
            V = row * V
            _fwht_last_axis(V)
        return V


@dataclass(frozen=True, eq=False)
class DiscreteHasher(Hasher):
    config: HashFamilyConfig
    embed: FastJlTransform | SparseJl
    lift: np.ndarray  # (d_prime, m) of discrete-Gaussian atoms
    kind = "discrete"

    @property
    def num_vertices(self) -> int:
        return self.lift.shape[0]

    def _embed(self, x):
        if isinstance(self.embed, SparseJl):
            return apply_sparse_jl(self.embed, x)
        return apply_fjlt(self.embed, x)

    def _transform(self, x):
        return self.lift @ self._embed(x)

    def _transform_batch(self, X):
        if isinstance(self.embed, SparseJl):
            E = apply_sparse_jl_batch(self.embed, X)
        else:
            E = apply_fjlt_batch(self.embed, X)
        return E @ self.lift.T


def sample_hasher(cfg: HashFamilyConfig, rng: np.random.Generator | None = None,
                  ledger: RandomnessLedger | None = None) -> Hasher:
    """Draw one hash function of the configured family.

    All randomness comes from ``rng`` (derived from cfg.seed when omitted),
    in a fixed order per family.  For the discrete family the ledger
    receives the embedding entries (sign and subset bits, or the sparse-JL
    seed bits) and the d' x m x bits matrix cost.
    """
    if rng is None:
        rng = derive_rng(cfg.seed, DOMAIN_FAMILY)
    if cfg.kind == "dense":
        return DenseHasher(cfg, rng.standard_normal((cfg.d, cfg.d)))
    if cfg.kind == "fast":
        fjlt = sample_fjlt(cfg.d, cfg.m, rng)
        return FastHasher(cfg, fjlt, rng.standard_normal((cfg.d_prime, cfg.m)))
    if cfg.kind == "pseudo":
        d_pad = next_pow2(cfg.d)
        signs = rng.integers(0, 2, size=(3, d_pad)) * 2.0 - 1.0
        return PseudoHasher(cfg, signs)
    # discrete
    if cfg.lowrand:
        embed = build_sparse_jl(cfg.d, cfg.m, s=cfg.jl_sparsity, k=cfg.jl_indep,
                                ledger=ledger, rng=rng)
    else:
        embed = sample_fjlt(cfg.d, cfg.m, rng)
        if ledger is not None:
            d_pad = embed.input_dim
            ledger.record(RADEMACHER_LABEL, d_pad)
            ledger.record(ROW_SUBSET_LABEL, cfg.m * (d_pad - 1).bit_length())
    dg = build_discrete_gaussian(cfg.bits)
    lift = dg.sample(rng, size=(cfg.d_prime, cfg.m), ledger=ledger, label=MATRIX_LABEL)
    return DiscreteHasher(cfg, embed, lift)
