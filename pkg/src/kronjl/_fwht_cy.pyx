# cython: boundscheck=False, wraparound=False, cdivision=True
"""In-place orthonormal Walsh-Hadamard butterflies, compiled hot path."""

from libc.math cimport sqrt


def fwht2(double[:, ::1] a):
    """Transform each row of a C-contiguous (rows, n) float64 array in place.

    n must be a power of two. Applies the unnormalized butterfly then one
    final 1/sqrt(n) scaling so the transform matrix is orthonormal.
    """
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t h, i, j, r
    cdef double u, v, scale
    if n & (n - 1):
        raise ValueError("row length must be a power of two")
    scale = 1.0 / sqrt(<double> n)
    with nogil:
        for r in range(rows):
            h = 1
            while h < n:
                i = 0
                while i < n:
                    for j in range(i, i + h):
                        u = a[r, j]
                        v = a[r, j + h]
                        a[r, j] = u + v
                        a[r, j + h] = u - v
                    i += 2 * h
                h <<= 1
            for j in range(n):
                a[r, j] *= scale
