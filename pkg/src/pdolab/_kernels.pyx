# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Each routine mirrors one in ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def mode_product(const double complex[:, :, ::1] x, const double complex[:, ::1] mat):
    """out[a, q, b] = sum_p x[a, p, b] * mat[p, q]; zero entries of ``mat`` are skipped."""
    cdef Py_ssize_t na = x.shape[0], nm = x.shape[1], nb = x.shape[2]
    cdef Py_ssize_t nk = mat.shape[1]
    if mat.shape[0] != nm:
        raise ValueError("inner dimensions differ")
    out_arr = np.zeros((na, nk, nb), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef Py_ssize_t a, p, q, b
    cdef double complex coef
    with nogil:
        for a in range(na):
            for p in range(nm):
                for q in range(nk):
                    coef = mat[p, q]
                    if coef.real == 0.0 and coef.imag == 0.0:
                        continue
                    for b in range(nb):
                        out[a, q, b] = out[a, q, b] + x[a, p, b] * coef
    return out_arr


def pivot(double[:, ::1] tab, Py_ssize_t row, Py_ssize_t col):
    """Gauss-Jordan pivot of a dense tableau in place."""
    cdef Py_ssize_t nr = tab.shape[0], nc = tab.shape[1]
    cdef Py_ssize_t i, j
    cdef double piv = tab[row, col]
    cdef double f
    if piv == 0.0:
        raise ZeroDivisionError("zero pivot")
    with nogil:
        for j in range(nc):
            tab[row, j] = tab[row, j] / piv
        for i in range(nr):
            if i == row:
                continue
            f = tab[i, col]
            if f == 0.0:
                continue
            for j in range(nc):
                tab[i, j] = tab[i, j] - f * tab[row, j]
            tab[i, col] = 0.0
