"""Pure NumPy / Python implementation of the hot kernels.

The compiled twin (``_kernels_cy``) evaluates Kronecker symbols pairwise in a
tight C loop.  Here we exploit instead that for a fixed lower argument n the
map D -> (D/n) is periodic with period dividing 8n (it is a real character
modulo 8n), so a sweep over many D reduces to one small lookup table per n
plus vectorised gathers.  Both backends must agree bit for bit; the test
suite checks them against each other and against independent oracles.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# Above this table size fall back to per-element evaluation.
_TABLE_LIMIT = 1 << 20


def kronecker_one(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 0, by the binary Jacobi algorithm."""
    a = int(a)
    n = int(n)
    if n < 0:
        raise ValueError("lower argument must be nonnegative")
    if n == 0:
        return 1 if a in (1, -1) else 0
    t = 1
    # split off the even part of n; (a/2) is the mod-8 character
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            t = -t
    # Jacobi symbol (a/n) for odd n via reciprocity
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def kronecker_table(n: int) -> np.ndarray:
    """Values of D -> (D/n) on residues 0..8n-1 (the character period)."""
    period = 8 * int(n) if n > 0 else 1
    return np.array([kronecker_one(r, n) for r in range(period)], dtype=np.int8)


def kronecker_col(Ds: np.ndarray, n: int) -> np.ndarray:
    """(D/n) for every D in ``Ds`` (int64 array), fixed n >= 0."""
    Ds = np.ascontiguousarray(Ds, dtype=np.int64)
    n = int(n)
    if n > 0 and 8 * n <= _TABLE_LIMIT:
        table = kronecker_table(n)
        return table[Ds % (8 * n)]
    return np.array([kronecker_one(int(d), n) for d in Ds], dtype=np.int8)


def sweep_sum(Ds: np.ndarray, ns: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """out[i] = sum_k weights[k] * (Ds[i]/ns[k]), Kahan-compensated over k.

    The compensation matters once the term count grows (polynomial lengths
    beyond ~1e6); it is cheap enough to keep on unconditionally.
    """
    Ds = np.ascontiguousarray(Ds, dtype=np.int64)
    ns = np.ascontiguousarray(ns, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    if ns.shape != weights.shape:
        raise ValueError("ns and weights must have matching shapes")
    out = np.zeros(Ds.shape, dtype=np.complex128)
    comp = np.zeros(Ds.shape, dtype=np.complex128)
    for k in range(ns.shape[0]):
        chi = kronecker_col(Ds, int(ns[k]))
        term = weights[k] * chi
        y = term - comp
        s = out + y
        comp = (s - out) - y
        out = s
    return out
