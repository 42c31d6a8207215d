"""Pure numpy versions of the routines in ``_kernels.pyx``."""

import numpy as np


def mode_product(x, mat):
    return np.einsum("apb,pq->aqb", x, mat)


def pivot(tab, row, col):
    piv = tab[row, col]
    if piv == 0.0:
        raise ZeroDivisionError("zero pivot")
    tab[row] /= piv
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])
    tab[factors != 0.0, col] = 0.0
