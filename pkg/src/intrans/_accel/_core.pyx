# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Mirrors _purepy.py exactly; see that module for the contracts. All kernels
are deterministic transforms (the caller supplies any randomness), so the
compiled and pure paths produce identical outputs.
"""

import numpy as np

IMPL = "compiled"


def pair_counts(const double[::1] a_sorted, const double[::1] b_sorted):
    cdef Py_ssize_t na = a_sorted.shape[0]
    cdef Py_ssize_t nb = b_sorted.shape[0]
    cdef Py_ssize_t i = 0, lo = 0, hi = 0
    cdef long long wins = 0, ties = 0
    cdef double a
    for i in range(na):
        a = a_sorted[i]
        while lo < nb and b_sorted[lo] < a:
            lo += 1
        if hi < lo:
            hi = lo
        while hi < nb and b_sorted[hi] <= a:
            hi += 1
        wins += lo
        ties += hi - lo
    return int(wins), int(ties)


def mcmc_pair_transfer(long long[::1] faces, const long long[::1] ii,
                       const long long[::1] jj, const double[::1] uu):
    cdef Py_ssize_t n = faces.shape[0]
    cdef Py_ssize_t steps = ii.shape[0]
    cdef Py_ssize_t t
    cdef long long i, j, s, lo, hi, x
    for t in range(steps):
        i = ii[t]
        j = jj[t]
        s = faces[i] + faces[j]
        lo = s - n if s - n > 1 else 1
        hi = n if n < s - 1 else s - 1
        x = lo + <long long>(uu[t] * <double>(hi - lo + 1))
        if x > hi:  # u*width can round up to width at the very top of [0,1)
            x = hi
        faces[i] = x
        faces[j] = s - x


def profile_margins(const long long[:, ::1] positions,
                    const long long[::1] pair_a,
                    const long long[::1] pair_b):
    cdef Py_ssize_t n = positions.shape[0]
    cdef Py_ssize_t npairs = pair_a.shape[0]
    cdef Py_ssize_t v, p
    cdef long long acc
    out = np.empty(npairs, dtype=np.int64)
    cdef long long[::1] mv = out
    for p in range(npairs):
        acc = 0
        for v in range(n):
            if positions[v, pair_a[p]] < positions[v, pair_b[p]]:
                acc += 1
            else:
                acc -= 1
        mv[p] = acc
    return out
