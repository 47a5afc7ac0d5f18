# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled contraction kernel for heat brackets.

Computes  sum over (i_0,...,i_n) of
    w[i_0] * G_0[i_0,i_1] * ... * G_n[i_n,i_0] * dd[rank(sorted tuple)]
without materializing any d^(n+1) tensor.  The divided-difference table is
indexed by the colex rank of the sorted index multiset.
"""

import numpy as np

BACKEND = "compiled"

DEF MAXM = 16  # factors per bracket (n + 1); callers cap n well below this


cdef inline long _rank_sorted(long* buf, int m, const long[:, ::1] binom) noexcept nogil:
    cdef long r = 0
    cdef int k
    for k in range(m):
        r += binom[buf[k] + k, k + 1]
    return r


cdef double complex _loop(
    int pos,
    int m,
    int d,
    int i0,
    double complex partial,
    long* idx,
    const double complex[:, :, ::1] mats,
    const double complex[::1] dd,
    const long[:, ::1] binom,
) noexcept nogil:
    """Fill positions 1..m-1; factor G_{pos-1} links i_{pos-1} -> i_pos and
    G_{m-1} closes the cycle back to i0 once every index is fixed."""
    cdef double complex acc = 0.0
    cdef double complex p
    cdef int i, k, j
    cdef long buf[MAXM]
    cdef long v
    if pos == m:
        p = partial * mats[m - 1, idx[m - 1], i0]
        if p.real == 0.0 and p.imag == 0.0:
            return 0.0
        for k in range(m):
            buf[k] = idx[k]
        # insertion sort of <= MAXM small integers
        for k in range(1, m):
            v = buf[k]
            j = k - 1
            while j >= 0 and buf[j] > v:
                buf[j + 1] = buf[j]
                j -= 1
            buf[j + 1] = v
        return p * dd[_rank_sorted(buf, m, binom)]
    for i in range(d):
        p = partial * mats[pos - 1, idx[pos - 1], i]
        if p.real != 0.0 or p.imag != 0.0:
            idx[pos] = i
            acc += _loop(pos + 1, m, d, i0, p, idx, mats, dd, binom)
    return acc


def bracket_sum(w, mats, dd, binom):
    """Entry point; see module docstring for the contract."""
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double complex[:, :, ::1] mv = np.ascontiguousarray(
        mats, dtype=np.complex128
    )
    cdef const double complex[::1] ddv = np.ascontiguousarray(
        dd, dtype=np.complex128
    )
    cdef const long[:, ::1] bv = np.ascontiguousarray(binom, dtype=np.int64)
    cdef int m = mv.shape[0]
    cdef int d = mv.shape[1]
    if m > MAXM:
        raise ValueError(f"bracket kernel supports at most {MAXM} factors, got {m}")
    cdef long idx[MAXM]
    cdef long buf[1]
    cdef double complex total = 0.0
    cdef double complex p
    cdef int i0
    if m == 1:
        with nogil:
            for i0 in range(d):
                p = wv[i0] * mv[0, i0, i0]
                if p.real != 0.0 or p.imag != 0.0:
                    buf[0] = i0
                    total += p * ddv[_rank_sorted(buf, 1, bv)]
        return complex(total)
    with nogil:
        for i0 in range(d):
            idx[0] = i0
            total += _loop(1, m, d, i0, wv[i0], idx, mv, ddv, bv)
    return complex(total)
