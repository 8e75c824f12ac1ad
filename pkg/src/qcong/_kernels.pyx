# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for truncated series arithmetic mod p.

All inputs are int64 arrays with entries already reduced into [0, p).
Accumulation is done in uint64 with delayed reduction; the number of
products that may be summed before a reduction is computed from p.
"""

import numpy as np
cimport numpy as cnp

ctypedef unsigned long long u64
ctypedef long long i64

cnp.import_array()


cdef inline i64 _batch(i64 p):
    cdef u64 sq = <u64>(p - 1) * <u64>(p - 1)
    if sq == 0:
        return 1 << 40
    cdef u64 room = (<u64>0xFFFFFFFFFFFFFFFF) - <u64>p
    cdef u64 k = room // sq
    if k > (1 << 40):
        k = 1 << 40
    return <i64>k


def mul_trunc(const i64[::1] a, const i64[::1] b, i64 p, Py_ssize_t L):
    """Truncated Cauchy product sum_{i+j=n} a[i] b[j] for n < L."""
    cdef Py_ssize_t na = min(a.shape[0], L)
    cdef Py_ssize_t nb = min(b.shape[0], L)
    out_arr = np.zeros(L, dtype=np.int64)
    cdef i64[::1] out = out_arr
    cdef i64 batch = _batch(p)
    cdef Py_ssize_t n, i, lo, hi
    cdef u64 acc
    cdef i64 cnt
    with nogil:
        for n in range(L):
            lo = n - nb + 1
            if lo < 0:
                lo = 0
            hi = n
            if hi > na - 1:
                hi = na - 1
            acc = 0
            cnt = 0
            for i in range(lo, hi + 1):
                acc += <u64>a[i] * <u64>b[n - i]
                cnt += 1
                if cnt == batch:
                    acc %= <u64>p
                    cnt = 0
            out[n] = <i64>(acc % <u64>p)
    return out_arr


def sparse_mul(const i64[::1] a, const i64[::1] idx, const i64[::1] val,
               i64 p, Py_ssize_t L):
    """Multiply dense `a` by the sparse series sum val[j] q^idx[j].

    `idx` must be sorted ascending.
    """
    cdef Py_ssize_t na = min(a.shape[0], L)
    cdef Py_ssize_t nt = idx.shape[0]
    out_arr = np.zeros(L, dtype=np.int64)
    cdef i64[::1] out = out_arr
    cdef i64 batch = _batch(p)
    cdef Py_ssize_t n, j, k
    cdef u64 acc
    cdef i64 cnt
    with nogil:
        for n in range(L):
            acc = 0
            cnt = 0
            for j in range(nt):
                k = n - idx[j]
                if k < 0:
                    break
                if k < na:
                    acc += <u64>val[j] * <u64>a[k]
                    cnt += 1
                    if cnt == batch:
                        acc %= <u64>p
                        cnt = 0
            out[n] = <i64>(acc % <u64>p)
    return out_arr


def sparse_div(const i64[::1] a, const i64[::1] idx, const i64[::1] val,
               i64 p, Py_ssize_t L, i64 inv0):
    """Solve g * s = a for g, where s = sum val[j] q^idx[j].

    Requires idx[0] == 0 and inv0 * val[0] == 1 (mod p). The recurrence
    g[n] = inv0 * (a[n] - sum_{j>=1} val[j] g[n - idx[j]]) is sequential.
    """
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nt = idx.shape[0]
    out_arr = np.zeros(L, dtype=np.int64)
    cdef i64[::1] g = out_arr
    cdef i64 batch = _batch(p)
    cdef Py_ssize_t n, j, k
    cdef u64 acc
    cdef i64 cnt
    with nogil:
        for n in range(L):
            acc = 0
            if n < na:
                acc = <u64>a[n]
            cnt = 1
            for j in range(1, nt):
                k = n - idx[j]
                if k < 0:
                    break
                # subtract val*g by adding (p - val)*g
                acc += <u64>(p - val[j]) * <u64>g[k]
                cnt += 1
                if cnt >= batch:
                    acc %= <u64>p
                    cnt = 1
            acc %= <u64>p
            g[n] = <i64>((acc * <u64>inv0) % <u64>p)
    return out_arr
