"""Multi-table LSH index for the (R, c) near-neighbor problem.

L tables each key points by the concatenation of k independent hashes,
folded into a 64-bit key with a fixed splitmix64 chain; a fold collision
merely merges buckets, which can only add candidates.  Hashers are drawn
per (table, slot) from streams independent of L, so growing L extends the
table list without changing existing tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DimensionError, ParameterError
from .families import HashFamilyConfig, Hasher, sample_hasher
from .rng import DOMAIN_INDEX, derive_rng

_MASK64 = (1 << 64) - 1


def _splitmix64(v: int) -> int:
    v = (v + 0x9E3779B97F4A7C15) & _MASK64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _MASK64
    return v ^ (v >> 31)


_KEY_INIT = 0x632BE59BD9B4E019


def composite_key(codes) -> int:
    """Fold serialized hash codes into one 64-bit bucket key."""
    acc = _KEY_INIT
    for c in codes:
        acc = _splitmix64(acc ^ (int(c) & _MASK64))
    return acc


def _composite_keys_batch(code_cols: list[np.ndarray]) -> np.ndarray:
    """Vectorized composite_key over per-slot code columns (must match it exactly)."""
    n = code_cols[0].shape[0]
    acc = np.full(n, _KEY_INIT, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for col in code_cols:
            v = acc ^ col.astype(np.int64).view(np.uint64)
            v = v + np.uint64(0x9E3779B97F4A7C15)
            v = (v ^ (v >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            v = (v ^ (v >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            acc = v ^ (v >> np.uint64(31))
    return acc


@dataclass(eq=False)
class Dataset:
    """Unit-normalized points with ids 0..n-1."""

    points: np.ndarray

    @classmethod
    def from_points(cls, arr) -> "Dataset":
        pts = np.array(arr, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise DimensionError("dataset must be a nonempty 2-d array")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("dataset entries must be finite")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0.0):
            raise DegenerateInputError("zero vectors cannot be indexed")
        pts /= norms[:, None]
        return cls(pts)

    @classmethod
    def from_file(cls, path) -> "Dataset":
        """Ingest a binary vectors file (u32 dimension + f32 records)."""
        from .vectors_io import read_vectors
        return cls.from_points(read_vectors(path))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class IndexParams:
    """k hashes per table, L tables, and the hash family to draw from."""

    k: int
    L: int
    family: HashFamilyConfig | None = None

    def __post_init__(self):
        if self.k < 1 or self.L < 1:
            raise ParameterError("k and L must be at least 1")


def suggest_params(n: int, p1: float, p2: float,
                   family: HashFamilyConfig | None = None) -> IndexParams:
    """Standard parametrization k = ceil(ln n / ln(1/p2)), L = ceil(n^rho).

    rho = ln(1/p1) / ln(1/p2); the choice of k makes p2^k <= 1/n.  With
    L = ceil(n^rho) tables, the per-query success probability is the usual
    constant (about 1 - 1/e), not arbitrarily close to one; see
    tables_for_recall for a target-driven table count.
    """
    if n < 2:
        raise ParameterError("n must be at least 2")
    if not (0.0 < p2 <= p1 < 1.0):
        raise ParameterError(f"need 0 < p2 <= p1 < 1, got p1={p1}, p2={p2}")
    k = math.ceil(math.log(n) / math.log(1.0 / p2))
    rho = math.log(1.0 / p1) / math.log(1.0 / p2)
    L = min(int(n), math.ceil(n ** rho))
    return IndexParams(k=k, L=L, family=family)


def tables_for_recall(k: int, p1: float, target_recall: float = 0.9) -> int:
    """Table count making 1 - (1 - p1^k)^L >= target_recall."""
    if not (0.0 < p1 < 1.0 and 0.0 < target_recall < 1.0):
        raise ParameterError("p1 and target_recall must lie in (0, 1)")
    miss = math.log(1.0 - target_recall)
    return max(1, math.ceil(miss / math.log(1.0 - p1 ** k)))


@dataclass(frozen=True)
class QueryResult:
    candidates: tuple[int, ...]
    answer: int | None
    answer_distance: float | None
    distance_evals: int


class LshIndex:
    """Immutable after construction; concurrent queries are safe."""

    def __init__(self, dataset: Dataset, params: IndexParams,
                 hashers: list[list[Hasher]], tables: list[dict[int, list[int]]]):
        self.dataset = dataset
        self.params = params
        self.hashers = hashers
        self.tables = tables

    def __len__(self) -> int:
        return self.dataset.n

    def query(self, x, R: float, c: float,
              exclude_id: int | None = None) -> QueryResult:
        """Candidates from the query's L buckets, plus the chosen answer.

        The answer is the first candidate (ascending id) at distance < c*R,
        else the nearest candidate, else None.  exclude_id drops the query's
        own id before any distance is computed, for querying stored points.
        """
        if R < 0 or c < 1:
            raise ParameterError("need R >= 0 and c >= 1")
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.dataset.dim:
            raise DimensionError(f"query must have dimension {self.dataset.dim}")
        nx = np.linalg.norm(x)
        if nx == 0.0:
            raise DegenerateInputError("the zero vector cannot be queried")
        x = x / nx

        seen: set[int] = set()
        for table, slot_hashers in zip(self.tables, self.hashers):
            key = composite_key([h.hash_code(x) for h in slot_hashers])
            seen.update(table.get(key, ()))
        if exclude_id is not None:
            seen.discard(int(exclude_id))
        candidates = tuple(sorted(seen))
        if not candidates:
            return QueryResult((), None, None, 0)

        diffs = self.dataset.points[list(candidates)] - x
        dists = np.linalg.norm(diffs, axis=1)
        threshold = c * R
        best: int | None = None
        best_dist: float | None = None
        for cid, dist in zip(candidates, dists):
            if dist < threshold:
                best, best_dist = cid, float(dist)
                break
        if best is None:
            pos = int(np.argmin(dists))
            best, best_dist = candidates[pos], float(dists[pos])
        return QueryResult(candidates, best, best_dist, len(candidates))


def query_index(idx: LshIndex, x, R: float, c: float,
                exclude_id: int | None = None) -> QueryResult:
    """Functional form of LshIndex.query."""
    return idx.query(x, R, c, exclude_id=exclude_id)


def build_index(ds: Dataset, params: IndexParams, seed: int = 0) -> LshIndex:
    """Sample L*k hashers and insert every point into each table.

    Hasher streams are keyed by (table, slot) only, so the same seed with a
    larger L reproduces the first tables verbatim.
    """
    if params.family is None:
        raise ParameterError("params.family must be set to build an index")
    hashers: list[list[Hasher]] = []
    tables: list[dict[int, list[int]]] = []
    for t in range(params.L):
        slot_hashers = [
            sample_hasher(params.family, derive_rng(seed, DOMAIN_INDEX, t, j))
            for j in range(params.k)
        ]
        code_cols = [h.hash_batch(ds.points) for h in slot_hashers]
        keys = _composite_keys_batch(code_cols)
        table: dict[int, list[int]] = {}
        for pid, key in enumerate(keys.tolist()):
            table.setdefault(key, []).append(pid)
        hashers.append(slot_hashers)
        tables.append(table)
    return LshIndex(ds, params, hashers, tables)
