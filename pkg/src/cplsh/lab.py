"""Monte Carlo collision-probability experiments.

Every trial draws a fresh pair at the requested distance and a fresh hash
function, both from a per-trial stream derived as (seed, domain, point,
trial), so estimates are reproducible under any parallel schedule; work is
split into fixed-size chunks whose counts are summed, and --threads only
changes which process computes a chunk.

For the dense and fast families the Gaussian lift is simulated through its
exact two-dimensional marginal: for fixed embedded vectors (xe, ye), the
rows of (G xe, G ye) are i.i.d. bivariate normal with covariance
[[|xe|^2, <xe, ye>], [<xe, ye>, |ye|^2]], so drawing d' such rows is
distributed identically to drawing the full d' x m matrix and multiplying.
This cuts the per-trial cost from d' * m to 2 d' normals without changing
any collision probability; ``method="explicit"`` keeps the full-matrix
path available for cross-checks.  The pseudo-rotation and discrete
families have no rotation-invariant stage, so their trials always realize
the full transform.
"""

from __future__ import annotations

import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .discrete_gaussian import build_discrete_gaussian
from .errors import InsufficientTrialsError, DimensionError, ParameterError
from .families import HashFamilyConfig, sample_hasher, vertex_codes
from .rng import DOMAIN_COLLIDE, DOMAIN_CONVERGE, DOMAIN_RHO, derive_rng
from .sparse_jl import _block_layout, default_sparsity, smallest_prime_at_least
from .transforms import fwht_rows, next_pow2

_CHUNK = 1024
_Z95 = 1.959963984540054
_METHODS = ("auto", "explicit")


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; stays inside [0, 1]."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ParameterError("need 0 <= successes <= trials, trials >= 1")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
    # the interval provably brackets phat; snap away float noise at the edges
    return min(max(0.0, center - half), phat), max(min(1.0, center + half), phat)


@dataclass(frozen=True)
class CollisionEstimate:
    """Monte Carlo p-hat with its 95% Wilson interval."""

    R: float
    p_hat: float
    trials: int
    ci_low: float
    ci_high: float

    def __post_init__(self):
        if not 0.0 <= self.ci_low <= self.p_hat <= self.ci_high <= 1.0:
            raise ParameterError("interval must satisfy 0 <= low <= p_hat <= high <= 1")


@dataclass(frozen=True)
class SensitivityEstimate:
    R: float
    c: float
    p1_hat: float
    p2_hat: float
    rho_hat: float
    rho_theory: float


@dataclass(frozen=True)
class ConvergencePoint:
    d: int
    estimate: CollisionEstimate
    ln_inv_p: float
    theory_leading: float
    residual: float


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a family, a distance grid, and a trial budget."""

    family: HashFamilyConfig
    distances: tuple[float, ...] = ()
    trials: int = 20000
    c: float | None = None
    dims: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "distances", tuple(float(r) for r in self.distances))
        if any(not 0.0 < r < 2.0 for r in self.distances):
            raise ParameterError("every distance must lie in (0, 2)")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if self.c is not None and self.c < 1.0:
            raise ParameterError("approximation factor c must be >= 1")
        if self.dims is not None:
            object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))


def theory_rho(R: float, c: float) -> float:
    """Asymptotic sensitivity (1/c^2) (4 - c^2 R^2) / (4 - R^2), o(1) excluded."""
    if not 0.0 < R < 2.0:
        raise ParameterError("R must lie in (0, 2)")
    if c < 1.0:
        raise ParameterError("c must be >= 1")
    if c * R >= 2.0:
        raise ParameterError("need c * R < 2")
    return (4.0 - c * c * R * R) / (c * c * (4.0 - R * R))


def theory_ln_inv_p(R: float, d) -> float:
    """Leading term R^2/(4 - R^2) * ln d of ln(1/p); the ln ln d term is excluded."""
    if not 0.0 < R < 2.0:
        raise ParameterError("R must lie in (0, 2)")
    if d < 2:
        raise ParameterError("d must be at least 2")
    return (R * R) / (4.0 - R * R) * math.log(d)


def embedding_dim_note(d: int) -> str:
    """The asymptotic embedded-dimension guidance, for reference only."""
    v = math.log(d) ** 5 * math.log(math.log(d)) ** 4
    return (
        f"asymptotic guidance at d={d}: m = O(ln^5 d * ln^4 ln d) ~ {v:.3g} "
        "times an unknown constant, which exceeds d at experimental scales; "
        "m is therefore an explicit parameter"
    )


def pair_at_distance(d: int, R: float, rng: np.random.Generator):
    """Unit vectors (x, y) with ||x - y|| = R, x uniform on the sphere.

    y = (1 - R^2/2) x + R sqrt(1 - R^2/4) t for a uniform unit tangent t,
    which lands back on the sphere exactly: ||y||^2 = (1 - R^2/2)^2 +
    R^2 (1 - R^2/4) = 1 and ||x - y||^2 = R^2 by the same algebra.
    """
    if d < 2:
        raise DimensionError("pairs at a fixed distance need dimension >= 2")
    if not 0.0 < R < 2.0:
        raise ParameterError("R must lie in (0, 2)")
    x = rng.standard_normal(d)
    x /= np.linalg.norm(x)
    while True:
        t = rng.standard_normal(d)
        t -= (t @ x) * x
        nt = np.linalg.norm(t)
        if nt > 1e-12:
            break
    t /= nt
    y = (1.0 - R * R / 2.0) * x + (R * math.sqrt(1.0 - R * R / 4.0)) * t
    return x, y


# ----------------------------------------------------------------------
# chunk kernels (top-level so worker processes can receive them by name)
# ----------------------------------------------------------------------

def _gens(seed, path, start, count):
    return [derive_rng(seed, *path, t) for t in range(start, start + count)]


def _pairs_from_block(block: np.ndarray, d: int, R: float):
    """Pairs at distance R from a (count, 2d) block of standard normals."""
    x = block[:, :d]
    t = block[:, d:]
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    t -= np.sum(t * x, axis=1, keepdims=True) * x
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    y = (1.0 - R * R / 2.0) * x + (R * math.sqrt(1.0 - R * R / 4.0)) * t
    return x, y


def _marginal_count(xe, ye, U, W) -> int:
    """Collisions of the Gaussian-lift hash via its exact 2-d marginal."""
    nx = np.linalg.norm(xe, axis=1)
    dot = np.sum(xe * ye, axis=1)
    proj = dot / nx
    orth = np.sqrt(np.maximum(np.sum(ye * ye, axis=1) - proj * proj, 0.0))
    gx = nx[:, None] * U
    gy = proj[:, None] * U + orth[:, None] * W
    return int(np.count_nonzero(vertex_codes(gx) == vertex_codes(gy)))


def _chunk_dense(family, R, seed, path, start, count) -> int:
    d = family.d
    gens = _gens(seed, path, start, count)
    buf = np.empty((count, 4 * d))
    for i, g in enumerate(gens):
        buf[i] = g.standard_normal(4 * d)
    x, y = _pairs_from_block(buf[:, : 2 * d], d, R)
    return _marginal_count(x, y, buf[:, 2 * d: 3 * d], buf[:, 3 * d:])


def _embed_fjlt_trials(gens, x, y, d, m):
    """Per-trial subsampled-Hadamard embeddings (signs, then rows, per trial)."""
    count = len(gens)
    d_pad = next_pow2(d)
    sg = np.empty((count, d_pad))
    rows = np.empty((count, m), dtype=np.int64)
    for i, g in enumerate(gens):
        sg[i] = g.integers(0, 2, d_pad) * 2.0 - 1.0
        rows[i] = np.sort(g.choice(d_pad, size=m, replace=False, shuffle=False))
    X = np.zeros((count, d_pad))
    X[:, :d] = x
    Y = np.zeros((count, d_pad))
    Y[:, :d] = y
    X *= sg
    Y *= sg
    fwht_rows(X)
    fwht_rows(Y)
    scale = 1.0 / math.sqrt(m)
    xe = np.take_along_axis(X, rows, axis=1) * scale
    ye = np.take_along_axis(Y, rows, axis=1) * scale
    return xe, ye


def _chunk_fast(family, R, seed, path, start, count) -> int:
    d, m, dp = family.d, family.m, family.d_prime
    gens = _gens(seed, path, start, count)
    pair_buf = np.empty((count, 2 * d))
    for i, g in enumerate(gens):
        pair_buf[i] = g.standard_normal(2 * d)
    x, y = _pairs_from_block(pair_buf, d, R)
    xe, ye = _embed_fjlt_trials(gens, x, y, d, m)
    kern = np.empty((count, 2 * dp))
    for i, g in enumerate(gens):
        kern[i] = g.standard_normal(2 * dp)
    return _marginal_count(xe, ye, kern[:, :dp], kern[:, dp:])


def _chunk_pseudo(family, R, seed, path, start, count) -> int:
    d = family.d
    d_pad = next_pow2(d)
    gens = _gens(seed, path, start, count)
    pair_buf = np.empty((count, 2 * d))
    sg = np.empty((count, 3, d_pad))
    for i, g in enumerate(gens):
        pair_buf[i] = g.standard_normal(2 * d)
        sg[i] = g.integers(0, 2, (3, d_pad)) * 2.0 - 1.0
    x, y = _pairs_from_block(pair_buf, d, R)
    X = np.zeros((count, d_pad))
    X[:, :d] = x
    Y = np.zeros((count, d_pad))
    Y[:, :d] = y
    for r in range(3):
        X *= sg[:, r, :]
        Y *= sg[:, r, :]
        fwht_rows(X)
        fwht_rows(Y)
    return int(np.count_nonzero(vertex_codes(X) == vertex_codes(Y)))


def _embed_sparse_trials(gens, x, y, family):
    """Per-trial sparse-JL embeddings from 2k field coefficients each."""
    d, m = family.d, family.m
    s = family.jl_sparsity if family.jl_sparsity is not None else default_sparsity(d, m)
    k = family.jl_indep
    prime = smallest_prime_at_least(max(d, 2 * m))
    offsets, sizes = _block_layout(m, s)
    count = len(gens)
    pos_coeffs = np.empty((count, k), dtype=np.uint64)
    sign_coeffs = np.empty((count, k), dtype=np.uint64)
    for i, g in enumerate(gens):
        pos_coeffs[i] = g.integers(0, prime, size=k, dtype=np.uint64)
        sign_coeffs[i] = g.integers(0, prime, size=k, dtype=np.uint64)
    keys = (np.arange(d, dtype=np.uint64)[:, None] * np.uint64(s)
            + np.arange(s, dtype=np.uint64)[None, :]).ravel() % np.uint64(prime)

    def horner(coeffs):
        acc = np.repeat(coeffs[:, -1:], keys.shape[0], axis=1)
        p = np.uint64(prime)
        for j in range(k - 2, -1, -1):
            acc = (acc * keys[None, :] + coeffs[:, j: j + 1]) % p
        return acc.astype(np.int64).reshape(count, d, s)

    rows = offsets[None, None, :] + horner(pos_coeffs) % sizes[None, None, :]
    signs = 1.0 - 2.0 * (horner(sign_coeffs) & 1)
    flat = (rows + (np.arange(count) * m)[:, None, None]).ravel()
    scale = 1.0 / math.sqrt(s)

    def embed(v):
        contrib = (signs * v[:, :, None]).ravel()
        out = np.bincount(flat, weights=contrib, minlength=count * m)
        return out.reshape(count, m) * scale

    return embed(x), embed(y)


def _chunk_discrete(family, R, seed, path, start, count) -> int:
    d, m, dp, bits = family.d, family.m, family.d_prime, family.bits
    gens = _gens(seed, path, start, count)
    pair_buf = np.empty((count, 2 * d))
    for i, g in enumerate(gens):
        pair_buf[i] = g.standard_normal(2 * d)
    x, y = _pairs_from_block(pair_buf, d, R)
    if family.lowrand:
        xe, ye = _embed_sparse_trials(gens, x, y, family)
    else:
        xe, ye = _embed_fjlt_trials(gens, x, y, d, m)
    idx = np.empty((count, dp, m), dtype=np.int64)
    for i, g in enumerate(gens):
        idx[i] = g.integers(0, 1 << bits, size=(dp, m))
    dg = build_discrete_gaussian(bits)
    lift = dg.values_at(idx)
    vx = np.einsum("tpm,tm->tp", lift, xe)
    vy = np.einsum("tpm,tm->tp", lift, ye)
    return int(np.count_nonzero(vertex_codes(vx) == vertex_codes(vy)))


def _chunk_explicit(family, R, seed, path, start, count) -> int:
    """Full-machinery reference path: one realized hasher per trial."""
    d = family.d
    hits = 0
    for t in range(start, start + count):
        g = derive_rng(seed, *path, t)
        block = g.standard_normal(2 * d)
        x = block[:d].copy()
        x /= np.linalg.norm(x)
        tg = block[d:].copy()
        tg -= (tg @ x) * x
        tg /= np.linalg.norm(tg)
        y = (1.0 - R * R / 2.0) * x + (R * math.sqrt(1.0 - R * R / 4.0)) * tg
        h = sample_hasher(family, g)
        hits += h.hash_code(x) == h.hash_code(y)
    return hits


_CHUNK_FNS = {
    "dense": _chunk_dense,
    "fast": _chunk_fast,
    "pseudo": _chunk_pseudo,
    "discrete": _chunk_discrete,
}


def _count_chunk(args) -> int:
    family, R, seed, path, start, count, method = args
    if method == "explicit":
        return _chunk_explicit(family, R, seed, path, start, count)
    return _CHUNK_FNS[family.kind](family, R, seed, path, start, count)


def _map_units(units: list[tuple], threads: int) -> list[int]:
    """Evaluate chunk units, optionally across processes; order preserved."""
    if threads <= 1 or len(units) <= 1:
        return [_count_chunk(u) for u in units]
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:
        ctx = multiprocessing.get_context()
    try:
        with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as ex:
            return list(ex.map(_count_chunk, units, chunksize=1))
    except (OSError, PermissionError):
        # Pool creation can be forbidden in constrained environments; the
        # sequential result is identical by construction.
        return [_count_chunk(u) for u in units]


def _units_for(family, R, trials, seed, path, method):
    return [
        (family, float(R), int(seed), tuple(path), start, min(_CHUNK, trials - start), method)
        for start in range(0, trials, _CHUNK)
    ]


def _validate_run(family, R, trials, threads, method):
    if not isinstance(family, HashFamilyConfig):
        raise ParameterError("family must be a HashFamilyConfig")
    if not 0.0 <= R < 2.0:
        raise ParameterError("R must lie in [0, 2)")
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if threads < 1:
        raise ParameterError("threads must be at least 1")
    if method not in _METHODS:
        raise ParameterError(f"method must be one of {_METHODS}")


def collision_curve(family: HashFamilyConfig, distances, trials: int, seed: int = 0,
                    threads: int = 1, method: str = "auto") -> list[CollisionEstimate]:
    """Fresh-pair fresh-hasher collision estimates over a distance grid."""
    distances = [float(r) for r in distances]
    units: list[tuple] = []
    owners: list[int] = []
    for pi, R in enumerate(distances):
        _validate_run(family, R, trials, threads, method)
        pt_units = _units_for(family, R, trials, seed, (DOMAIN_COLLIDE, pi), method)
        units.extend(pt_units)
        owners.extend([pi] * len(pt_units))
    counts = _map_units(units, threads)
    hits = [0] * len(distances)
    for owner, cnt in zip(owners, counts):
        hits[owner] += cnt
    out = []
    for R, h in zip(distances, hits):
        lo, hi = wilson_interval(h, trials)
        out.append(CollisionEstimate(R=R, p_hat=h / trials, trials=trials,
                                     ci_low=lo, ci_high=hi))
    return out


def estimate_collision(cfg: ExperimentConfig, R: float,
                       threads: int = 1, method: str = "auto") -> CollisionEstimate:
    """Single-distance estimate; R = 0 degenerates to identical pairs (p-hat = 1)."""
    _validate_run(cfg.family, R, cfg.trials, threads, method)
    units = _units_for(cfg.family, R, cfg.trials, cfg.seed, (DOMAIN_COLLIDE, 0), method)
    hits = sum(_map_units(units, threads))
    lo, hi = wilson_interval(hits, cfg.trials)
    return CollisionEstimate(R=float(R), p_hat=hits / cfg.trials, trials=cfg.trials,
                             ci_low=lo, ci_high=hi)


def run_curve(cfg: ExperimentConfig, threads: int = 1,
              method: str = "auto") -> list[CollisionEstimate]:
    return collision_curve(cfg.family, cfg.distances, cfg.trials, cfg.seed,
                           threads=threads, method=method)


def estimate_rho(cfg: ExperimentConfig, R: float, c: float,
                 threads: int = 1, method: str = "auto") -> SensitivityEstimate:
    """p-hat at distances R and c*R with equal budgets, and the rho they imply."""
    _validate_run(cfg.family, R, cfg.trials, threads, method)
    if R <= 0.0:
        raise ParameterError("R must be positive")
    if c < 1.0 or c * R >= 2.0:
        raise ParameterError("need 1 <= c and c * R < 2")
    units = _units_for(cfg.family, R, cfg.trials, cfg.seed, (DOMAIN_RHO, 0), method)
    n_first = len(units)
    units += _units_for(cfg.family, c * R, cfg.trials, cfg.seed, (DOMAIN_RHO, 1), method)
    counts = _map_units(units, threads)
    hits1 = sum(counts[:n_first])
    hits2 = sum(counts[n_first:])
    p1 = hits1 / cfg.trials
    p2 = hits2 / cfg.trials
    if p2 <= 0.0 or p1 <= 0.0:
        raise InsufficientTrialsError(
            f"no collisions observed (p1_hat={p1}, p2_hat={p2}); "
            "increase the trial budget or decrease the dimension"
        )
    if p2 >= 1.0:
        raise InsufficientTrialsError("every trial collided at distance c*R")
    rho_hat = math.log(1.0 / p1) / math.log(1.0 / p2) if p1 < 1.0 else 0.0
    return SensitivityEstimate(R=float(R), c=float(c), p1_hat=p1, p2_hat=p2,
                               rho_hat=rho_hat, rho_theory=theory_rho(R, c))


def _family_for_dim(kind: str, d: int, bits: int, lowrand: bool,
                    m_fraction: float) -> HashFamilyConfig:
    if kind in ("dense", "pseudo"):
        return HashFamilyConfig(kind=kind, d=d)
    m = max(1, int(round(d * m_fraction)))
    if kind == "fast":
        return HashFamilyConfig(kind="fast", d=d, m=m, d_prime=d)
    return HashFamilyConfig(kind="discrete", d=d, m=m, d_prime=d, bits=bits,
                            lowrand=lowrand)


def convergence_experiment(kind: str, R: float, dims, trials: int, seed: int = 0,
                           threads: int = 1, bits: int = 10, lowrand: bool = False,
                           m_fraction: float = 0.25,
                           method: str = "auto") -> list[ConvergencePoint]:
    """p-hat per dimension with the leading-term prediction and its residual.

    Fast/discrete configurations lift back to d (d_prime = d) with
    m = round(m_fraction * d).
    """
    dims = [int(d) for d in dims]
    if not dims or any(d < 4 for d in dims) or any(b <= a for a, b in zip(dims, dims[1:])):
        raise ParameterError("dims must be increasing and all >= 4")
    if not 0.0 < R < 2.0:
        raise ParameterError("R must lie in (0, 2)")
    units: list[tuple] = []
    owners: list[int] = []
    for di, d in enumerate(dims):
        family = _family_for_dim(kind, d, bits, lowrand, m_fraction)
        pt_units = _units_for(family, R, trials, seed, (DOMAIN_CONVERGE, di), method)
        units.extend(pt_units)
        owners.extend([di] * len(pt_units))
    counts = _map_units(units, threads)
    hits = [0] * len(dims)
    for owner, cnt in zip(owners, counts):
        hits[owner] += cnt
    out = []
    for d, h in zip(dims, hits):
        lo, hi = wilson_interval(h, trials)
        est = CollisionEstimate(R=float(R), p_hat=h / trials, trials=trials,
                                ci_low=lo, ci_high=hi)
        ln_inv = math.log(1.0 / est.p_hat) if est.p_hat > 0.0 else math.inf
        lead = theory_ln_inv_p(R, d)
        out.append(ConvergencePoint(d=d, estimate=est, ln_inv_p=ln_inv,
                                    theory_leading=lead, residual=ln_inv - lead))
    return out


# ----------------------------------------------------------------------
# CSV renderers (stable schemas; floats use shortest round-trip repr)
# ----------------------------------------------------------------------

def _f(v: float) -> str:
    return repr(float(v))


def collision_csv(estimates: list[CollisionEstimate]) -> str:
    lines = ["R,p_hat,ci_low,ci_high,trials"]
    lines += [
        f"{_f(e.R)},{_f(e.p_hat)},{_f(e.ci_low)},{_f(e.ci_high)},{e.trials}"
        for e in estimates
    ]
    return "\n".join(lines) + "\n"


def rho_csv(est: SensitivityEstimate) -> str:
    header = "R,c,p1_hat,p2_hat,rho_hat,rho_theory"
    row = (f"{_f(est.R)},{_f(est.c)},{_f(est.p1_hat)},{_f(est.p2_hat)},"
           f"{_f(est.rho_hat)},{_f(est.rho_theory)}")
    return header + "\n" + row + "\n"


def convergence_csv(points: list[ConvergencePoint]) -> str:
    lines = ["d,p_hat,ln_inv_p,theory_leading,residual"]
    lines += [
        f"{p.d},{_f(p.estimate.p_hat)},{_f(p.ln_inv_p)},"
        f"{_f(p.theory_leading)},{_f(p.residual)}"
        for p in points
    ]
    return "\n".join(lines) + "\n"
