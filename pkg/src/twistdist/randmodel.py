"""The probabilistic side: random sign assignments and their statistics.

Each prime carries an independent random sign

    P(x_p = +1) = P(x_p = -1) = p / (2(p+1)),      P(x_p = 0) = 1 / (p+1),

extended multiplicatively to x_n = prod x_p^{v_p(n)}.  The expectation is
E[x_n] = prod_{p|n} p/(p+1) for square n and 0 otherwise, which is what
makes exact mixed moments of the truncated random series computable by
enumerating tuples of prime powers.

Sampling is counter-based (Philox keyed by the seed), so a fixed
(seed, cutoff) pair always reproduces the same assignment, and the value at
a given prime index does not depend on the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeffs import SatakeProvider
from .errors import BudgetExceededError, CoverageError
from .ntcore import sieve_primes
from .samplesets import ComplexSampleSet

DEFAULT_TUPLE_BUDGET = 10**8


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _signs_from_uniforms(u: np.ndarray, primes: np.ndarray) -> np.ndarray:
    p = primes.astype(np.float64)
    plus = p / (2.0 * (p + 1.0))
    out = np.zeros(u.shape, dtype=np.int8)
    out[u < 2.0 * plus] = -1
    out[u < plus] = 1
    return out


@dataclass(frozen=True)
class RandomAssignment:
    """A realisation p -> x_p in {-1, 0, +1} for all primes <= cutoff."""

    cutoff: int
    seed: int
    primes: np.ndarray
    values: np.ndarray

    def value_at(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise CoverageError(f"prime {p} exceeds assignment cutoff {self.cutoff}")
        return int(self.values[i])


def sample_assignment(P: int, seed: int) -> RandomAssignment:
    """Draw one assignment for all primes <= P, reproducibly from the seed."""
    if P < 2:
        raise ValueError("P must be >= 2")
    primes = sieve_primes(int(P)).primes
    u = _rng(seed).random(len(primes))
    return RandomAssignment(int(P), int(seed), primes, _signs_from_uniforms(u, primes))


def x_n(assignment: RandomAssignment, n: int) -> int:
    """x_n = prod_{p | n} x_p^{v_p(n)}; x_1 = 1.

    Powers collapse by parity: x^m is x for odd m and x^2 in {0, 1} for
    even m, so no repeated multiplication happens.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    out = 1
    for p in assignment.primes:
        p = int(p)
        if p * p > n:
            break
        if n % p == 0:
            m = 0
            while n % p == 0:
                n //= p
                m += 1
            x = assignment.value_at(p)
            out *= x if m % 2 else x * x
            if out == 0 and n == 1:
                return 0
    if n > 1:
        # leftover factor is prime
        x = assignment.value_at(n)
        out *= x
    return out


def expected_x(n: int) -> float:
    """E[x_n]: prod_{p|n} p/(p+1) when n is a perfect square, else 0."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return 1.0
    out = 1.0
    p = 2
    while p * p <= n:
        if n % p == 0:
            m = 0
            while n % p == 0:
                n //= p
                m += 1
            if m % 2:
                return 0.0
            out *= p / (p + 1.0)
        p += 1 if p == 2 else 2
    if n > 1:
        return 0.0  # leftover prime has exponent 1
    return out


@dataclass(frozen=True)
class RandomSeriesValue:
    """A truncated realisation of the random series."""

    value: complex
    truncation: float
    seed: int
    cutoff: int

    def __post_init__(self):
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise ValueError("random series value must be finite")


def _parity_weights(Y: float, t: float, provider: SatakeProvider):
    """Per-prime coefficient pair (odd-power total, even-power total).

    For x in {-1,0,1} the series term sum over p^m <= Y splits as
    x * c_odd(p) + x^2 * c_even(p), with c parity-aggregated coefficients
    (log p) lam(p^m) / p^{m(1+it)}.
    """
    table = sieve_primes(int(Y)) if Y >= 2 else sieve_primes(0)
    primes = table.primes
    provider.ensure_covers(primes)
    c_odd = np.zeros(len(primes), dtype=np.complex128)
    c_even = np.zeros(len(primes), dtype=np.complex128)
    index = {int(p): i for i, p in enumerate(primes)}
    for p, m, n in zip(table.power_primes, table.power_exps, table.powers):
        p, m, n = int(p), int(m), int(n)
        coeff = (
            math.log(p)
            * provider.lam(p, m)
            * (n ** -1.0)
            * np.exp(-1j * t * math.log(n))
        )
        if m % 2:
            c_odd[index[p]] += coeff
        else:
            c_even[index[p]] += coeff
    return primes, c_odd, c_even


def random_partial_sum(
    assignment: RandomAssignment, Y: float, t: float, provider: SatakeProvider
) -> RandomSeriesValue:
    """sum over prime powers p^m <= Y of (log p) lam(p^m) x_p^m / p^{m(1+it)}."""
    if Y >= 2 and assignment.cutoff < int(Y):
        raise CoverageError(
            f"assignment cutoff {assignment.cutoff} below truncation {Y}"
        )
    if Y < 2:
        return RandomSeriesValue(0j, float(Y), assignment.seed, assignment.cutoff)
    primes, c_odd, c_even = _parity_weights(Y, t, provider)
    x = assignment.values[: len(primes)].astype(np.float64)
    value = complex(np.dot(x, c_odd) + np.dot(x * x, c_even))
    return RandomSeriesValue(value, float(Y), assignment.seed, assignment.cutoff)


def _batch_values(
    Y: float,
    t: float,
    provider: SatakeProvider,
    count: int,
    seed: int,
    chunk: int = 4096,
) -> np.ndarray:
    """count independent truncated series values from one Philox stream."""
    if Y < 2:
        return np.zeros(count, dtype=np.complex128)
    primes, c_odd, c_even = _parity_weights(Y, t, provider)
    gen = _rng(seed)
    out = np.empty(count, dtype=np.complex128)
    done = 0
    while done < count:
        size = min(chunk, count - done)
        u = gen.random((size, len(primes)))
        x = _signs_from_uniforms(u, primes).astype(np.float64)
        out[done : done + size] = x @ c_odd + (x * x) @ c_even
        done += size
    return out


def mc_value_set(
    Y: float, t: float, provider: SatakeProvider, count: int, seed: int
) -> ComplexSampleSet:
    """count independent truncated random-series values, labelled by index."""
    if count < 1:
        raise ValueError("count must be >= 1")
    values = _batch_values(Y, t, provider, count, seed)
    dimension = 1 if provider.is_self_dual_at(t) else 2
    if dimension == 1:
        residue = float(np.abs(values.imag).max()) if count else 0.0
        if residue > 1e-9:
            raise ValueError(
                f"self-dual model produced non-real draws (|Im| up to {residue:.3g})"
            )
        values = values.real.astype(np.complex128)
    meta = {"Y": Y, "t": t, "provider": provider.source, "seed": seed, "count": count}
    return ComplexSampleSet(
        values, labels=np.arange(count, dtype=np.int64), dimension=dimension, meta=meta
    )


def exact_moment(
    j: int,
    ell: int,
    Y: float,
    t: float,
    provider: SatakeProvider,
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> complex:
    """E[S_X^j T_X^ell] for the truncated series, by exact enumeration.

    S_X sums (log p) lam(p^m) x_{p^m} / p^{m(1+it)} over p^m <= Y and T_X is
    its conjugate-coefficient partner.  The expectation expands over
    (j+ell)-tuples of prime powers; a tuple contributes the product of its
    coefficients times E[x_{n_1 ... n_{j+ell}}], which vanishes unless the
    product is a square.  Tuples are pruned as soon as more primes have odd
    exponent than there are slots left to fix them.
    """
    if j < 0 or ell < 0 or j + ell < 1:
        raise ValueError("need j, ell >= 0 with j + ell >= 1")
    if Y < 2:
        return 0j
    table = sieve_primes(int(Y))
    provider.ensure_covers(table.primes)
    k = j + ell
    npow = len(table.powers)
    if npow**k > budget:
        raise BudgetExceededError(
            f"{npow}^{k} tuples exceed budget {budget}; use mc_moment instead"
        )
    coeffs = []
    for p, m, n in zip(table.power_primes, table.power_exps, table.powers):
        p, m, n = int(p), int(m), int(n)
        c = (
            math.log(p)
            * provider.lam(p, m)
            * (n ** -1.0)
            * np.exp(-1j * t * math.log(n))
        )
        coeffs.append((p, m, complex(c)))

    total = 0j
    parity: dict[int, int] = {}

    def recurse(slot: int, weight: complex, odd_count: int):
        nonlocal total
        if odd_count > k - slot:
            return
        if slot == k:
            ew = 1.0
            for p in parity:
                ew *= p / (p + 1.0)
            total += weight * ew
            return
        conjugate = slot >= j
        for p, m, c in coeffs:
            w = weight * (c.conjugate() if conjugate else c)
            old = parity.get(p)
            new = (m if old is None else old + m) % 2
            parity[p] = new
            delta = new - (old if old is not None else 0)
            recurse(slot + 1, w, odd_count + delta)
            if old is None:
                del parity[p]
            else:
                parity[p] = old
        return

    recurse(0, 1 + 0j, 0)
    return total


def mc_moment(
    j: int,
    ell: int,
    Y: float,
    t: float,
    provider: SatakeProvider,
    samples: int,
    seed: int,
) -> tuple[complex, float]:
    """Monte-Carlo estimate of E[S_X^j T_X^ell] with its standard error.

    T_X = conj(S_X) pathwise (the signs are real), so each draw contributes
    S^j conj(S)^ell.  The standard error is sqrt(Var) of the complex draws
    over sqrt(samples).
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if j < 0 or ell < 0 or j + ell < 1:
        raise ValueError("need j, ell >= 0 with j + ell >= 1")
    s = _batch_values(Y, t, provider, samples, seed)
    draws = s**j * np.conj(s) ** ell
    mean = complex(np.mean(draws))
    var = float(np.mean(np.abs(draws - mean) ** 2)) * samples / max(1, samples - 1)
    return mean, math.sqrt(var / samples)
