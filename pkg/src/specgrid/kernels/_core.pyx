# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: pivoted Cholesky tests for grid membership.

Same contract as specgrid.kernels.pure; see that module for semantics.
The pivot threshold is exactly 0.0.
"""

import numpy as np

from libc.math cimport sqrt


cdef inline bint _chol_pd(double complex[:, ::1] b, Py_ssize_t k) noexcept nogil:
    """In-place lower Cholesky pivot test; clobbers the lower triangle."""
    cdef Py_ssize_t i, j, m
    cdef double s, d
    cdef double complex c
    for j in range(k):
        s = b[j, j].real
        for m in range(j):
            s -= b[j, m].real * b[j, m].real + b[j, m].imag * b[j, m].imag
        if s <= 0.0:
            return 0
        d = sqrt(s)
        b[j, j] = d
        for i in range(j + 1, k):
            c = b[i, j]
            for m in range(j):
                c = c - b[i, m] * b[j, m].conjugate()
            b[i, j] = c / d
    return 1


cdef inline void _build_gram(
    double complex[:, ::1] a,
    double complex[:, ::1] b,
    double q2,
    Py_ssize_t k,
) noexcept nogil:
    """b = a^H a - q2*I, lower triangle only (enough for _chol_pd)."""
    cdef Py_ssize_t i, j, r
    cdef double complex acc
    for i in range(k):
        for j in range(i + 1):
            acc = 0
            for r in range(k):
                acc = acc + a[r, i].conjugate() * a[r, j]
            if i == j:
                acc = acc - q2
            b[i, j] = acc


def pd_test(b) -> bool:
    """Return True iff the Hermitian matrix `b` is positive definite."""
    cdef double complex[:, ::1] bv = np.array(b, dtype=np.complex128, order="C")
    return bool(_chol_pd(bv, bv.shape[0]))


def smin_exceeds_gram(a, double q) -> bool:
    """Return True iff the smallest singular value of `a` exceeds `q`."""
    cdef double complex[:, ::1] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t k = av.shape[0]
    scratch = np.empty((k, k), dtype=np.complex128)
    cdef double complex[:, ::1] bv = scratch
    cdef bint res
    with nogil:
        _build_gram(av, bv, q * q, k)
        res = _chol_pd(bv, k)
    return bool(res)


def pseudospec_mask(t, lams, double q):
    """Membership mask: True where smin(t - lam*I) <= q, per lam."""
    cdef double complex[:, ::1] tv = np.ascontiguousarray(t, dtype=np.complex128)
    cdef double complex[::1] lv = np.ascontiguousarray(lams, dtype=np.complex128)
    cdef Py_ssize_t k = tv.shape[0]
    cdef Py_ssize_t npts = lv.shape[0]
    out = np.zeros(npts, dtype=np.uint8)
    cdef unsigned char[::1] ov = out
    a_scr = np.empty((k, k), dtype=np.complex128)
    b_scr = np.empty((k, k), dtype=np.complex128)
    cdef double complex[:, ::1] av = a_scr
    cdef double complex[:, ::1] bv = b_scr
    cdef double q2 = q * q
    cdef Py_ssize_t p, i, j
    cdef double complex lam
    with nogil:
        for p in range(npts):
            lam = lv[p]
            for i in range(k):
                for j in range(k):
                    av[i, j] = tv[i, j]
                av[i, i] = av[i, i] - lam
            _build_gram(av, bv, q2, k)
            if not _chol_pd(bv, k):
                ov[p] = 1
    return out.view(np.bool_)
