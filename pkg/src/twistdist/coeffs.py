"""Local coefficient providers.

A provider supplies, for each prime p, the tuple of local roots
(alpha_1(p), ..., alpha_d(p)) of degree d, from which the prime-power
coefficients are

    lam(p^m) = alpha_1(p)^m + ... + alpha_d(p)^m.

Built-ins: the degree-1 trivial provider (alpha = 1, quadratic Dirichlet
L-functions) and a degree-2 unit-circle provider built from a real Hecke
eigenvalue list.  Arbitrary data loads from a small text format, see
``file_provider``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MissingPrimeError, SatakeFileError
from .ntcore import PrimeTable, sieve_primes

SELF_DUAL_TOL = 1e-9


@dataclass(frozen=True)
class SatakeProvider:
    """Immutable map p -> (alpha_1(p), ..., alpha_d(p)).

    ``theta`` bounds |alpha_j(p)| <= p^theta.  ``self_dual_twist`` is tau0
    when the local data satisfies {alpha_j(p)} = {conj(alpha_j(p)) p^{i tau0}}
    as multisets, the condition making the values at height t = tau0/2 real.
    ``table`` may be None for rule-based providers covering all primes.
    """

    degree: int
    theta: float
    self_dual_twist: float | None
    source: str
    table: dict[int, tuple[complex, ...]] | None = field(default=None, repr=False)
    rule: Callable[[int], tuple[complex, ...]] | None = field(default=None, repr=False)

    def alpha(self, p: int) -> tuple[complex, ...]:
        if self.table is not None:
            try:
                return self.table[int(p)]
            except KeyError:
                raise MissingPrimeError(int(p)) from None
        return self.rule(int(p))

    def lam(self, p: int, m: int) -> complex:
        """Coefficient lam(p^m) = sum_j alpha_j(p)^m."""
        if m < 1:
            raise ValueError("m must be >= 1")
        return sum(a**m for a in self.alpha(p))

    def covers(self, primes) -> bool:
        if self.table is None:
            return True
        return all(int(p) in self.table for p in primes)

    def ensure_covers(self, primes) -> None:
        if self.table is None:
            return
        for p in primes:
            if int(p) not in self.table:
                raise MissingPrimeError(int(p))

    def is_self_dual_at(self, t: float) -> bool:
        """True when the declared twist makes values at height t real."""
        return (
            self.self_dual_twist is not None
            and abs(self.self_dual_twist - 2.0 * t) <= SELF_DUAL_TOL
        )

    def lambda_array(self, table: PrimeTable, t: float = 0.0) -> np.ndarray:
        """lam(p^m) n^{-it} over the prime powers of ``table`` (n = p^m)."""
        self.ensure_covers(table.primes)
        out = np.empty(len(table.powers), dtype=np.complex128)
        for i, (p, m, n) in enumerate(
            zip(table.power_primes, table.power_exps, table.powers)
        ):
            out[i] = self.lam(int(p), int(m)) * cmath.exp(-1j * t * math.log(int(n)))
        return out


def _check_theta_bound(table, theta, source):
    for p, alphas in table.items():
        bound = p**theta + 1e-9
        for a in alphas:
            if abs(a) > bound:
                raise SatakeFileError(
                    f"|alpha| = {abs(a):.6g} exceeds p^theta = {p**theta:.6g} "
                    f"at p = {p} ({source})"
                )
    if theta >= 0.25:
        warnings.warn(
            "theta >= 1/4: exponential decay of the model characteristic "
            "function is no longer guaranteed",
            stacklevel=3,
        )


def _check_self_dual(table, tau0, source):
    for p, alphas in table.items():
        twisted = sorted(
            (a.conjugate() * cmath.exp(1j * tau0 * math.log(p)) for a in alphas),
            key=lambda z: (round(z.real, 9), round(z.imag, 9)),
        )
        plain = sorted(alphas, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
        for a, b in zip(plain, twisted):
            if abs(a - b) > SELF_DUAL_TOL * max(1.0, abs(a)):
                raise SatakeFileError(
                    f"declared self-dual twist {tau0} fails at p = {p} ({source})"
                )


def trivial_provider() -> SatakeProvider:
    """Degree 1, alpha(p) = 1: lam(p^m) = 1 for all prime powers."""
    return SatakeProvider(
        degree=1,
        theta=0.0,
        self_dual_twist=0.0,
        source="trivial",
        rule=lambda p: (1 + 0j,),
    )


def gl2_provider(
    ap: dict[int, float], weight: int | None = None, source: str = "gl2"
) -> SatakeProvider:
    """Degree-2 unit-circle provider from real Hecke eigenvalues.

    With ``weight`` k the raw eigenvalues are normalised by p^{(k-1)/2};
    the normalised value must satisfy |a_p| <= 2, giving conjugate roots
    alpha, conj(alpha) on the unit circle with alpha + conj(alpha) = a_p.
    """
    table = {}
    for p, a in sorted(ap.items()):
        a = float(a)
        if weight is not None:
            a /= p ** ((weight - 1) / 2.0)
        if abs(a) > 2.0 + 1e-12:
            raise SatakeFileError(f"normalised |a_p| = {abs(a):.6g} > 2 at p = {p}")
        s = math.sqrt(max(0.0, 1.0 - (a / 2.0) ** 2))
        alpha = complex(a / 2.0, s)
        table[int(p)] = (alpha, alpha.conjugate())
    return SatakeProvider(
        degree=2, theta=0.0, self_dual_twist=0.0, source=source, table=table
    )


def file_provider(path) -> SatakeProvider:
    """Load Satake data from a text file.

    Format: header line ``#degree d theta th [selfdual tau0]``, then one
    record per line, ``p re(a1) im(a1) ... re(ad) im(ad)``, whitespace
    separated.  Later lines starting with ``#`` are comments.  Invariants
    (theta bound, declared self-duality) are checked on load; primes absent
    from the file error only when their coefficients are requested.
    """
    degree = None
    theta = None
    tau0 = None
    table: dict[int, tuple[complex, ...]] = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if degree is None:
                    toks = line[1:].split()
                    try:
                        if toks[0] != "degree":
                            raise ValueError
                        degree = int(toks[1])
                        if toks[2] != "theta":
                            raise ValueError
                        theta = float(toks[3])
                        if len(toks) > 4:
                            if toks[4] != "selfdual":
                                raise ValueError
                            tau0 = float(toks[5])
                    except (ValueError, IndexError):
                        raise SatakeFileError(
                            "header must read '#degree d theta th [selfdual tau0]'",
                            lineno,
                        ) from None
                    if degree < 1:
                        raise SatakeFileError("degree must be >= 1", lineno)
                    if not 0.0 <= theta < 0.5:
                        raise SatakeFileError("theta must lie in [0, 1/2)", lineno)
                continue
            if degree is None:
                raise SatakeFileError("missing '#degree ...' header", lineno)
            toks = line.split()
            if len(toks) != 1 + 2 * degree:
                raise SatakeFileError(
                    f"expected 1 + 2*{degree} fields, got {len(toks)}", lineno
                )
            try:
                p = int(toks[0])
                vals = [float(x) for x in toks[1:]]
            except ValueError:
                raise SatakeFileError("unparseable number", lineno) from None
            if p < 2:
                raise SatakeFileError(f"{p} is not a prime", lineno)
            table[p] = tuple(
                complex(vals[2 * j], vals[2 * j + 1]) for j in range(degree)
            )
    if degree is None:
        # empty file: provider knows nothing; every lam() call will error
        return SatakeProvider(
            degree=1, theta=0.0, self_dual_twist=None, source=str(path), table={}
        )
    _check_theta_bound(table, theta, str(path))
    if tau0 is not None:
        _check_self_dual(table, tau0, str(path))
    return SatakeProvider(
        degree=degree,
        theta=theta,
        self_dual_twist=tau0,
        source=str(path),
        table=table,
    )


def hypothesis_h_partial(provider: SatakeProvider, k: int, P: float) -> float:
    """Partial sum sum_{p <= P} (log p)^2 |lam(p^k)|^2 / p^k.

    A convergence diagnostic: for fixed k >= 2 the values should stabilise
    as P grows (they are nondecreasing in P).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if P < 2:
        return 0.0
    table = sieve_primes(int(P))
    provider.ensure_covers(table.primes)
    total = 0.0
    for p in table.primes:
        p = int(p)
        lam = provider.lam(p, k)
        total += (math.log(p) ** 2) * abs(lam) ** 2 / p**k
    return total
