"""2^b-atom quantization of the standard normal with exact bit accounting.

Atoms sit at the quantile midpoints Phi^-1((k + 1/2) / 2^b), each with
probability 2^-b, which keeps the CDF within 2^-(b+1) of Phi everywhere and
makes sampling a b-bit table lookup.  The table is mirrored around zero so
the distribution is symmetric bit for bit.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import ParameterError
from .ledger import RandomnessLedger

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
MAX_BITS = 30
# Above this the atom table would top 8 MiB; larger b is still accepted,
# with quantiles computed on demand instead of stored.
_TABLE_BITS = 20

# Acklam's rational approximation to the normal quantile (initial guess only;
# Newton refinement below drives |Phi(x) - p| under 1e-9).
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_cdf(x):
    """Standard normal CDF, erfc-based so both tails stay accurate."""
    arr = np.asarray(x, dtype=np.float64)
    out = 0.5 * special.erfc(-arr / _SQRT2)
    return float(out) if np.isscalar(x) else out


def _acklam_tail(q: np.ndarray) -> np.ndarray:
    num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
    den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
    return num / den


def _acklam(p: np.ndarray) -> np.ndarray:
    x = np.empty_like(p)
    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)
    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num * q / den
    if np.any(lo):
        x[lo] = _acklam_tail(np.sqrt(-2.0 * np.log(p[lo])))
    if np.any(hi):
        x[hi] = -_acklam_tail(np.sqrt(-2.0 * np.log(1.0 - p[hi])))
    return x


def inverse_normal_cdf(p):
    """Standard normal quantile with |Phi(x) - p| <= 1e-9.

    Rational initial guess (Acklam) refined by Newton steps on the
    erfc-based CDF; p = 1/2 maps to exactly 0.
    """
    scalar = np.isscalar(p)
    arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if arr.size and (np.any(arr <= 0.0) or np.any(arr >= 1.0)):
        raise ParameterError("probability must lie strictly inside (0, 1)")
    x = _acklam(arr)
    for _ in range(3):
        err = 0.5 * special.erfc(-x / _SQRT2) - arr
        x -= err * _SQRT_2PI * np.exp(0.5 * x * x)
    return float(x[0]) if scalar else x.reshape(np.shape(p))


class DiscreteGaussian:
    """Symmetric 2^bits-valued stand-in for N(0, 1).

    Every draw consumes exactly ``bits`` random bits (one uniform index into
    the sorted atom vector); the count is reported to a ledger when one is
    supplied.
    """

    __slots__ = ("bits", "_table")

    def __init__(self, bits: int):
        if not isinstance(bits, (int, np.integer)) or not 1 <= int(bits) <= MAX_BITS:
            raise ParameterError(f"bits must be an integer in [1, {MAX_BITS}], got {bits!r}")
        self.bits = int(bits)
        if self.bits <= _TABLE_BITS:
            self._table = self.atom_values(np.arange(self.num_atoms))
            self._table.flags.writeable = False
        else:
            self._table = None

    @property
    def num_atoms(self) -> int:
        return 1 << self.bits

    @property
    def atoms(self) -> np.ndarray:
        """The sorted atom vector (materialized for bits <= 20)."""
        if self._table is None:
            raise ParameterError(
                f"atom table with 2^{self.bits} entries is too large to "
                "materialize; use atom_values on index ranges instead"
            )
        return self._table

    def atom_values(self, ks) -> np.ndarray:
        """Atoms at indices ks, mirrored so atoms[k] == -atoms[n-1-k] exactly."""
        ks1 = np.atleast_1d(np.asarray(ks, dtype=np.int64))
        n = self.num_atoms
        if ks1.size and (ks1.min() < 0 or ks1.max() >= n):
            raise ParameterError("atom index out of range")
        half = n >> 1
        low = np.where(ks1 < half, ks1, n - 1 - ks1)
        vals = inverse_normal_cdf((low + 0.5) / n)
        out = np.where(ks1 < half, vals, -vals)
        return out.reshape(np.shape(ks))

    def values_at(self, u) -> np.ndarray:
        """Atoms at the given indices; table lookup when materialized."""
        if self._table is not None:
            return self._table[np.asarray(u, dtype=np.int64)]
        return self.atom_values(u)

    def sample(self, rng: np.random.Generator, size=None,
               ledger: RandomnessLedger | None = None,
               label: str = "discrete-gaussian"):
        """Return atoms[u] for b-bit uniform u; reports bits consumed."""
        u = rng.integers(0, self.num_atoms, size=size)
        if ledger is not None:
            count = 1 if size is None else int(np.prod(size))
            ledger.record(label, count * self.bits)
        picked = self.values_at(u)
        return float(picked) if size is None else picked

    def variance(self) -> float:
        """Exact second moment 2^-b * sum(atoms^2) (the mean is zero)."""
        n = self.num_atoms
        total = 0.0
        step = 1 << min(self.bits, _TABLE_BITS)
        for start in range(0, n >> 1, step):
            ks = np.arange(start, min(start + step, n >> 1))
            total += 2.0 * float(np.sum(self.atom_values(ks) ** 2))
        return total / n

    def cdf_sup_distance(self) -> float:
        """sup_x |F_X(x) - Phi(x)|, evaluated exactly at the atom boundaries.

        F_X is a step function, so the supremum is attained at an atom from
        the left or the right; scanning both one-sided limits at every atom
        is exhaustive.
        """
        n = self.num_atoms
        worst = 0.0
        step = 1 << min(self.bits, _TABLE_BITS)
        for start in range(0, n, step):
            ks = np.arange(start, min(start + step, n))
            phi = normal_cdf(self.atom_values(ks))
            right = np.abs((ks + 1) / n - phi)
            left = np.abs(ks / n - phi)
            worst = max(worst, float(right.max()), float(left.max()))
        return worst


@lru_cache(maxsize=8)
def _cached_discrete_gaussian(b: int) -> DiscreteGaussian:
    return DiscreteGaussian(b)


def build_discrete_gaussian(b: int) -> DiscreteGaussian:
    """The 2^b-atom quantized normal (immutable, so instances are shared)."""
    if isinstance(b, (int, np.integer)):
        return _cached_discrete_gaussian(int(b))
    return DiscreteGaussian(b)


def sample(dg: DiscreteGaussian, rng: np.random.Generator,
           ledger: RandomnessLedger | None = None):
    """One draw from dg, consuming exactly dg.bits random bits."""
    return dg.sample(rng, ledger=ledger)
