"""The arithmetic side: short Dirichlet polynomials over quadratic characters.

For a discriminant D and polynomial length Y the central quantity is

    S_Y(D) = sum_{p^m <= Y} (log p) lam(p^m) chi_D(p^m) / p^{m(1+it)},

swept over all fundamental discriminants |D| <= N.  Empirical moments of
these values converge, as N grows with Y fixed, to the exact moments of the
random model (randmodel.exact_moment); the character-sum average over
squares has the explicit limit prod_{p|m} p/(p+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels
from .coeffs import SatakeProvider, trivial_provider
from .ntcore import PrimeTable, enumerate_discriminants, sieve_primes
from .samplesets import ComplexSampleSet

# Sweeps over fewer discriminants than this are not worth threading.
_MIN_CHUNK = 20000


def default_polynomial_length(N: int) -> float:
    """Default Y = (log N)^2."""
    return math.log(N) ** 2


@dataclass(frozen=True)
class FamilyConfig:
    """Parameters of a family sweep.

    Y defaults to (log N)^2.  The provider must cover all primes <= Y; this
    is checked before any sweep starts.
    """

    N: int
    Y: float | None = None
    t: float = 0.0
    provider: SatakeProvider = field(default_factory=trivial_provider)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.Y is None:
            object.__setattr__(self, "Y", default_polynomial_length(self.N))
        if self.Y < 0:
            raise ValueError("Y must be >= 0")

    def prime_table(self) -> PrimeTable:
        return sieve_primes(int(self.Y))

    def meta(self) -> dict:
        return {
            "N": self.N,
            "Y": self.Y,
            "t": self.t,
            "provider": self.provider.source,
        }


def polynomial_weights(cfg: FamilyConfig) -> tuple[np.ndarray, np.ndarray]:
    """(prime powers n <= Y, coefficients (log p) lam(n) / n^{1+it})."""
    table = cfg.prime_table()
    if len(table.powers) == 0:
        return np.array([], dtype=np.int64), np.array([], dtype=np.complex128)
    cfg.provider.ensure_covers(table.primes)
    ns = table.powers
    lam = cfg.provider.lambda_array(table, t=cfg.t)
    logs = np.log(table.power_primes.astype(np.float64))
    weights = logs * lam / ns.astype(np.float64)
    return ns, weights


def short_polynomial(cfg: FamilyConfig, D) -> complex:
    """S_Y(D) for a single discriminant."""
    ns, weights = polynomial_weights(cfg)
    if len(ns) == 0:
        return 0j
    out = kernels.sweep_sum(np.array([int(D)], dtype=np.int64), ns, weights)
    return complex(out[0])


def _sweep_array(discs, ns, weights, threads):
    if threads is None or threads <= 1 or len(discs) < 2 * _MIN_CHUNK:
        return kernels.sweep_sum(discs, ns, weights)
    # chunks are independent per D, so the result is identical for any split
    bounds = np.linspace(0, len(discs), threads + 1, dtype=np.int64)
    out = np.empty(len(discs), dtype=np.complex128)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {}
        for i in range(threads):
            lo, hi = int(bounds[i]), int(bounds[i + 1])
            if lo < hi:
                futures[pool.submit(kernels.sweep_sum, discs[lo:hi], ns, weights)] = (
                    lo,
                    hi,
                )
        for fut, (lo, hi) in futures.items():
            out[lo:hi] = fut.result()
    return out


def family_sweep(cfg: FamilyConfig, threads: int | None = None) -> ComplexSampleSet:
    """One S_Y(D) per fundamental discriminant |D| <= N, in D order."""
    discs = enumerate_discriminants(cfg.N)
    ns, weights = polynomial_weights(cfg)
    if len(ns) == 0:
        values = np.zeros(len(discs), dtype=np.complex128)
    else:
        values = _sweep_array(discs, ns, weights, threads)
    dimension = 1 if cfg.provider.is_self_dual_at(cfg.t) else 2
    if dimension == 1 and len(values):
        residue = float(np.abs(values.imag).max())
        if residue > 1e-9:
            raise ValueError(
                f"self-dual configuration produced non-real values (|Im| up to {residue:.3g})"
            )
        values = values.real.astype(np.complex128)
    return ComplexSampleSet(values, labels=discs, dimension=dimension, meta=cfg.meta())


def arithmetic_moment(
    cfg: FamilyConfig,
    j: int,
    ell: int,
    sweep: ComplexSampleSet | None = None,
    threads: int | None = None,
) -> complex:
    """Family average of S_Y(D)^j * T_Y(D)^ell.

    T_Y is the conjugate-coefficient polynomial at height -t; since chi_D
    is real it equals conj(S_Y(D)) exactly, which is what is used here.
    """
    if j < 0 or ell < 0 or j + ell < 1:
        raise ValueError("need j, ell >= 0 with j + ell >= 1")
    if sweep is None:
        sweep = family_sweep(cfg, threads=threads)
    v = sweep.values
    return complex(np.mean(v**j * np.conj(v) ** ell))


def second_moment(
    cfg: FamilyConfig, sweep: ComplexSampleSet | None = None
) -> float:
    """Mean of |S_Y(D)|^2 over the family; bounded in N for fixed Y."""
    if sweep is None:
        sweep = family_sweep(cfg)
    return float(np.mean(np.abs(sweep.values) ** 2))


def square_char_average(N: int, m: int) -> float:
    """Family average of chi_D(m^2), i.e. the proportion of D coprime to m.

    Converges to prod_{p|m} p/(p+1) as N grows; the error of the
    unnormalised sum is O(sqrt(N) tau(m)).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    discs = enumerate_discriminants(N)
    coprime = np.gcd(np.abs(discs), m) == 1
    return float(np.mean(coprime))


def euler_coprime_product(m: int) -> float:
    """prod_{p|m} p/(p+1), the N -> infinity limit of square_char_average."""
    out = 1.0
    mm = int(m)
    p = 2
    while p * p <= mm:
        if mm % p == 0:
            out *= p / (p + 1.0)
            while mm % p == 0:
                mm //= p
        p += 1
    if mm > 1:
        out *= mm / (mm + 1.0)
    return out
