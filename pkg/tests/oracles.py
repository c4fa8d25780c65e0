"""Independent reference implementations used only to check the library.

Everything here is deliberately brute force: recursive Hadamard matrices,
bisection quantiles, explicit vertex enumeration, trial-division primality.
"""

import math

import numpy as np


def naive_hadamard(d: int) -> np.ndarray:
    """H_{2n} = [[H, H], [H, -H]] built by recursion, entries +-1."""
    if d == 1:
        return np.array([[1.0]])
    h = naive_hadamard(d // 2)
    return np.block([[h, h], [h, -h]])


def phi(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def ppf_bisect(p: float, lo: float = -40.0, hi: float = 40.0, iters: int = 200) -> float:
    """Standard normal quantile by pure bisection on phi."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if phi(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def brute_force_vertex(v: np.ndarray) -> tuple[int, int]:
    """argmin over all 2d vertices +-e_i of ||v/||v|| - u||, by enumeration.

    Ties resolve to the smallest index, positive sign first, matching the
    library's documented order.
    """
    v = np.asarray(v, dtype=np.float64)
    vn = v / np.linalg.norm(v)
    best = None
    for i in range(v.shape[0]):
        for sign in (1, -1):
            u = np.zeros(v.shape[0])
            u[i] = sign
            dist = np.linalg.norm(vn - u)
            if best is None or dist < best[0] - 1e-15:
                best = (dist, i, sign)
    return best[1], best[2]


def brute_force_vertex_batch(V: np.ndarray) -> np.ndarray:
    """Serialized codes sign*(i+1) of the brute-force argmin, vectorized.

    Vertices are enumerated as (+e_0, -e_0, +e_1, ...) so np.argmin's
    first-minimum rule reproduces the documented tie-break.
    """
    V = np.asarray(V, dtype=np.float64)
    n, d = V.shape
    Vn = V / np.linalg.norm(V, axis=1, keepdims=True)
    U = np.zeros((2 * d, d))
    for i in range(d):
        U[2 * i, i] = 1.0
        U[2 * i + 1, i] = -1.0
    codes = np.empty(n, dtype=np.int64)
    step = max(1, (1 << 24) // (2 * d * d))
    for s in range(0, n, step):
        block = Vn[s:s + step]
        dists = np.linalg.norm(block[:, None, :] - U[None, :, :], axis=2)
        j = np.argmin(dists, axis=1)
        idx = j // 2
        sign = np.where(j % 2 == 0, 1, -1)
        codes[s:s + block.shape[0]] = sign * (idx + 1)
    return codes


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def next_prime_at_least(n: int) -> int:
    n = max(2, n)
    while not is_prime(n):
        n += 1
    return n
