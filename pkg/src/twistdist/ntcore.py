"""Elementary number-theoretic substrate.

Primes and prime powers up to a limit, von Mangoldt weights, Kronecker
symbols, and enumeration of fundamental discriminants.  Everything here is
pure and immutable after construction; the heavy sweeps live one layer up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

SQ6_OVER_PI2 = 6.0 / math.pi**2


def kronecker(D, n: int) -> int:
    """Kronecker symbol (D/n).

    Completely multiplicative in n, zero exactly when gcd(D, n) > 1, and
    periodic in n with period |D| when D is a fundamental discriminant.
    Accepts a plain integer or a FundamentalDiscriminant for D.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return kernels.kronecker_one(int(D), n)


def is_fundamental_discriminant(D: int) -> bool:
    """True iff D indexes a real primitive quadratic character.

    Either D = 1 mod 4 and squarefree, or D = 4m with m = 2, 3 mod 4 and
    squarefree.  D = 1 is admitted (trivial character); D = 0 is not.
    """
    D = int(D)
    if D == 0:
        return False
    if D % 4 == 1:
        return _is_squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        if m % 4 in (2, 3):
            return _is_squarefree(abs(m))
    return False


def _is_squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FundamentalDiscriminant:
    """Validated fundamental discriminant D (|D| >= 1)."""

    value: int

    def __post_init__(self):
        if not is_fundamental_discriminant(self.value):
            raise ValueError(f"{self.value} is not a fundamental discriminant")

    def __int__(self) -> int:
        return self.value

    def chi(self, n: int) -> int:
        """chi_D(n), the Kronecker symbol (D/n)."""
        return kronecker(self.value, n)


@dataclass(frozen=True)
class PrimeTable:
    """Primes <= limit and the prime powers p^m <= limit (m >= 1).

    ``powers`` is sorted by the prime-power value n = p^m; ``power_primes``
    and ``power_exps`` are the parallel p and m columns.
    """

    limit: int
    primes: np.ndarray
    powers: np.ndarray = field(repr=False)
    power_primes: np.ndarray = field(repr=False)
    power_exps: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def log_primes(self) -> np.ndarray:
        return np.log(self.primes.astype(np.float64))


def _prime_mask(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


def sieve_primes(limit: int) -> PrimeTable:
    """Eratosthenes sieve plus the prime-power index for p^m <= limit."""
    limit = int(limit)
    if limit < 2:
        empty = np.array([], dtype=np.int64)
        return PrimeTable(limit, empty, empty.copy(), empty.copy(), empty.copy())
    primes = np.flatnonzero(_prime_mask(limit)).astype(np.int64)
    ns = [primes]
    ps = [primes]
    ms = [np.ones(len(primes), dtype=np.int64)]
    m = 2
    while 2**m <= limit:
        root = int(round(limit ** (1.0 / m)))
        while root**m > limit:
            root -= 1
        while (root + 1) ** m <= limit:
            root += 1
        base = primes[primes <= root]
        if len(base) == 0:
            break
        ns.append(base**m)
        ps.append(base)
        ms.append(np.full(len(base), m, dtype=np.int64))
        m += 1
    n_all = np.concatenate(ns)
    order = np.argsort(n_all, kind="stable")
    return PrimeTable(
        limit,
        primes,
        n_all[order],
        np.concatenate(ps)[order],
        np.concatenate(ms)[order],
    )


def mangoldt(n: int) -> float:
    """von Mangoldt Lambda(n): log p when n = p^m, else 0."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return 0.0
    for p in (2, 3, 5):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    f = 7
    while f * f <= n:
        if n % f == 0:
            p = f
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
        f += 2
    return math.log(n)  # n itself prime


def _squarefree_mask(limit: int) -> np.ndarray:
    """mask[k] for 0 <= k <= limit, True iff k squarefree (mask[0] False)."""
    mask = np.ones(limit + 1, dtype=bool)
    mask[0] = False
    for p in range(2, math.isqrt(limit) + 1):
        p2 = p * p
        mask[p2::p2] = False
    return mask


def enumerate_discriminants(N: int) -> np.ndarray:
    """All fundamental discriminants with |D| <= N, ascending (int64).

    The count is (6/pi^2) N + O(sqrt N); D = 1 is included, having the
    trivial character.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1 (empty domain)")
    sf = _squarefree_mask(N)
    k = np.arange(N + 1, dtype=np.int64)
    r4 = k & 3
    pos = [k[(r4 == 1) & sf]]
    neg = [-k[(r4 == 3) & sf]]
    if N >= 4:
        m = np.arange(1, N // 4 + 1, dtype=np.int64)
        sfm = sf[1 : N // 4 + 1]
        rm = m & 3
        pos.append(4 * m[((rm == 2) | (rm == 3)) & sfm])
        # D = -4m has m' = -m with -m = 2,3 mod 4, i.e. m = 1,2 mod 4
        neg.append(-4 * m[((rm == 1) | (rm == 2)) & sfm])
    out = np.concatenate(pos + neg)
    out.sort()
    return out


def discriminant_count_estimate(N: int) -> float:
    """Main term (6/pi^2) N of the count of |D| <= N."""
    return SQ6_OVER_PI2 * N
