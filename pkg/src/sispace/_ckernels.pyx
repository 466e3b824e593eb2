# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batched Hermitian Jacobi and periodic difference energy."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _jacobi_one(double complex[:, ::1] a, double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t k = a.shape[0]
    cdef Py_ssize_t p, q, i
    cdef double fro = 0.0, off, r, app, aqq, theta, t, c, s
    cdef double complex e, ec, xp, xq, g
    cdef int sweep
    for p in range(k):
        for q in range(k):
            fro += cabs2(a[p, q])
    fro = sqrt(fro)
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(k):
            for q in range(k):
                if p != q:
                    off += cabs2(a[p, q])
        if sqrt(off) <= tol * fro:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                g = a[p, q]
                r = sqrt(cabs2(g))
                if r == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                e = g / r
                ec = e.conjugate()
                theta = (aqq - app) / (2.0 * r)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for i in range(k):
                    xp = a[i, p]
                    xq = a[i, q]
                    a[i, p] = c * xp - s * ec * xq
                    a[i, q] = s * xp + c * ec * xq
                for i in range(k):
                    xp = a[p, i]
                    xq = a[q, i]
                    a[p, i] = c * xp - s * e * xq
                    a[q, i] = s * xp + c * e * xq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * r
                a[q, q] = aqq + t * r


def eigvalsh_batch(mats, double tol=1e-14, int max_sweeps=30):
    """Eigenvalues of a stack of Hermitian matrices by cyclic Jacobi, descending."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] arr = np.array(mats, dtype=np.complex128, copy=True, order="C")
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError("expected an (n, K, K) stack")
    cdef double complex[:, :, ::1] a = arr
    cdef Py_ssize_t n = a.shape[0], k = a.shape[1], b, i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ev = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] evv = ev
    with nogil:
        for b in range(n):
            _jacobi_one(a[b], tol, max_sweeps)
            for i in range(k):
                evv[b, i] = a[b, i, i].real
    return -np.sort(-ev, axis=1, kind="stable")


def offset_difference_energy(values, offsets, weights):
    """``sum_j weights[j] * sum_i |v[i + offsets[j]] - v[i]|^2`` with periodic wrap."""
    cdef cnp.ndarray vals = np.ascontiguousarray(values, dtype=np.complex128)
    cdef Py_ssize_t d = vals.ndim
    shape = np.asarray(np.shape(vals), dtype=np.int64)
    cdef double complex[::1] v = vals.ravel()
    cdef cnp.int64_t[:, ::1] offs = np.ascontiguousarray(np.asarray(offsets, dtype=np.int64).reshape(-1, d))
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t npts = v.shape[0], nj = w.shape[0], i, j, ax, rem, src
    cdef cnp.int64_t[::1] dims = shape
    cdef cnp.int64_t[::1] strides = np.empty(d, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] coords = np.empty((npts, d), dtype=np.int64)
    cdef cnp.int64_t c
    cdef double total = 0.0, acc
    cdef double complex diff
    if nj != offs.shape[0]:
        raise ValueError("offsets and weights disagree in length")
    strides[d - 1] = 1
    for ax in range(d - 2, -1, -1):
        strides[ax] = strides[ax + 1] * dims[ax + 1]
    for i in range(npts):
        rem = i
        for ax in range(d):
            coords[i, ax] = rem // strides[ax]
            rem = rem % strides[ax]
    with nogil:
        for j in range(nj):
            if w[j] == 0.0:
                continue
            acc = 0.0
            for i in range(npts):
                src = 0
                for ax in range(d):
                    c = (coords[i, ax] + offs[j, ax]) % dims[ax]
                    if c < 0:
                        c = c + dims[ax]
                    src = src + c * strides[ax]
                diff = v[src] - v[i]
                acc = acc + diff.real * diff.real + diff.imag * diff.imag
            total = total + w[j] * acc
    return total
