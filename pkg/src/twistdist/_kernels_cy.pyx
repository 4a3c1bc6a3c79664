# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Kronecker symbols and character sweeps.

Mirrors the surface of ``_kernels_py`` and must agree with it bit for bit.
Sweeps use one lookup table per lower argument n (the map D -> (D/n) is a
real character modulo 8n), falling back to the per-pair binary algorithm
for n too large to tabulate.  The heavy loops release the GIL so callers
may chunk them across threads.
"""

import numpy as np


BACKEND_NAME = "cython"

# Above this table size fall back to per-element evaluation (same policy as
# the pure backend).
cdef long long TABLE_LIMIT = 1048576


cdef int _kron(long long a, long long n) noexcept nogil:
    cdef int t = 1
    cdef long long tmp, r
    if n == 0:
        return 1 if (a == 1 or a == -1) else 0
    while n % 2 == 0:
        n >>= 1
        if a % 2 == 0:
            return 0
        r = a % 8
        if r < 0:
            r += 8
        if r == 3 or r == 5:
            t = -t
    a %= n
    if a < 0:
        a += n
    while a != 0:
        while a % 2 == 0:
            a >>= 1
            r = n % 8
            if r == 3 or r == 5:
                t = -t
        tmp = a
        a = n
        n = tmp
        if (a % 4 == 3) and (n % 4 == 3):
            t = -t
        a %= n
    if n == 1:
        return t
    return 0


def kronecker_one(a, n):
    """Kronecker symbol (a/n) for n >= 0."""
    if n < 0:
        raise ValueError("lower argument must be nonnegative")
    return _kron(a, n)


def kronecker_table(n):
    """Values of D -> (D/n) on residues 0..8n-1 (the character period)."""
    cdef long long nn = n
    cdef long long period = 8 * nn if nn > 0 else 1
    out = np.empty(period, dtype=np.int8)
    cdef signed char[::1] ov = out
    cdef long long r
    with nogil:
        for r in range(period):
            ov[r] = <signed char> _kron(r, nn)
    return out


def kronecker_col(Ds, n):
    """(D/n) for every D in ``Ds`` (int64 array), fixed n >= 0."""
    cdef long long[::1] dv = np.ascontiguousarray(Ds, dtype=np.int64)
    cdef long long nn = n
    if nn < 0:
        raise ValueError("lower argument must be nonnegative")
    out = np.empty(dv.shape[0], dtype=np.int8)
    cdef signed char[::1] ov = out
    cdef signed char[::1] tab
    cdef Py_ssize_t i
    cdef long long period, r
    if nn > 0 and 8 * nn <= TABLE_LIMIT:
        tab = kronecker_table(nn)
        period = 8 * nn
        with nogil:
            for i in range(dv.shape[0]):
                r = dv[i] % period
                if r < 0:
                    r += period
                ov[i] = tab[r]
    else:
        with nogil:
            for i in range(dv.shape[0]):
                ov[i] = <signed char> _kron(dv[i], nn)
    return out


def sweep_sum(Ds, ns, weights):
    """out[i] = sum_k weights[k] * (Ds[i]/ns[k]), Kahan-compensated over k.

    Term order (ascending k) and the compensation formula match the pure
    backend exactly, so results are bit-identical.
    """
    cdef long long[::1] dv = np.ascontiguousarray(Ds, dtype=np.int64)
    cdef long long[::1] nv = np.ascontiguousarray(ns, dtype=np.int64)
    w = np.ascontiguousarray(weights, dtype=np.complex128)
    if w.shape[0] != nv.shape[0]:
        raise ValueError("ns and weights must have matching shapes")
    cdef double[::1] wre = np.ascontiguousarray(w.real)
    cdef double[::1] wim = np.ascontiguousarray(w.imag)
    cdef Py_ssize_t nd = dv.shape[0]
    out = np.zeros(nd, dtype=np.complex128)
    cdef double[:, ::1] ov = out.view(np.float64).reshape(nd, 2)
    comp = np.zeros((nd, 2), dtype=np.float64)
    cdef double[:, ::1] cv = comp
    cdef signed char[::1] tab
    cdef Py_ssize_t i, k
    cdef long long nn, period, r
    cdef double twre, twim, yre, yim, tre, tim
    cdef int chi
    cdef bint tabulated
    for k in range(nv.shape[0]):
        nn = nv[k]
        twre = wre[k]
        twim = wim[k]
        tabulated = nn > 0 and 8 * nn <= TABLE_LIMIT
        if tabulated:
            tab = kronecker_table(nn)
            period = 8 * nn
            with nogil:
                for i in range(nd):
                    r = dv[i] % period
                    if r < 0:
                        r += period
                    chi = tab[r]
                    yre = chi * twre - cv[i, 0]
                    yim = chi * twim - cv[i, 1]
                    tre = ov[i, 0] + yre
                    tim = ov[i, 1] + yim
                    cv[i, 0] = (tre - ov[i, 0]) - yre
                    cv[i, 1] = (tim - ov[i, 1]) - yim
                    ov[i, 0] = tre
                    ov[i, 1] = tim
        else:
            with nogil:
                for i in range(nd):
                    chi = _kron(dv[i], nn)
                    yre = chi * twre - cv[i, 0]
                    yim = chi * twim - cv[i, 1]
                    tre = ov[i, 0] + yre
                    tim = ov[i, 1] + yim
                    cv[i, 0] = (tre - ov[i, 0]) - yre
                    cv[i, 1] = (tim - ov[i, 1]) - yim
                    ov[i, 0] = tre
                    ov[i, 1] = tim
    return out
