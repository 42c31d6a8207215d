"""Dense two-phase simplex for small linear programs.

Solves ``min c.x  s.t.  A x = b, x >= 0``. Bland's rule (lowest index
entering and leaving) prevents cycling; pivots run through
:func:`pdolab.kernels.pivot`.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

FEAS_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray
    value: float
    iterations: int
    infeasibility: float = 0.0


def _run(tab, basis, ncols, tol, max_iter):
    """Iterate on ``tab`` (objective in the last row) until optimal; returns (status, iterations)."""
    m = tab.shape[0] - 1
    it = 0
    while it < max_iter:
        obj = tab[-1, :ncols]
        entering = np.flatnonzero(obj < -tol)
        if entering.size == 0:
            return "optimal", it
        j = int(entering[0])
        col = tab[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return "unbounded", it
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        i = int(min(ties, key=lambda r: basis[r]))
        kernels.pivot(tab, i, j)
        basis[i] = j
        it += 1
    raise RuntimeError(f"simplex did not terminate within {max_iter} pivots")


def solve(c, a_eq, b_eq, tol=FEAS_TOL, max_iter=10000):
    """Two-phase simplex. Returns an :class:`LPResult`."""
    a = np.array(a_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1
    b[neg] *= -1

    # phase 1: artificials n .. n+m-1 start in the basis
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n] = -a.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _, it1 = _run(tab, basis, n + m, tol, max_iter)
    infeas = -tab[-1, -1]
    if infeas > tol * max(1.0, b.sum()):
        return LPResult("infeasible", np.zeros(n), np.nan, it1, float(infeas))

    # drive remaining artificials out; rows where that is impossible are redundant
    keep = []
    for i in range(m):
        if basis[i] >= n:
            cand = np.flatnonzero(np.abs(tab[i, :n]) > tol)
            if cand.size:
                kernels.pivot(tab, i, int(cand[0]))
                basis[i] = int(cand[0])
            else:
                continue
        keep.append(i)
    tab2 = np.zeros((len(keep) + 1, n + 1))
    tab2[:-1, :n] = tab[keep, :n]
    tab2[:-1, -1] = tab[keep, -1]
    basis2 = [basis[i] for i in keep]
    tab2[-1, :n] = c
    for r, j in enumerate(basis2):
        tab2[-1] -= c[j] * tab2[r]
    tab2 = np.ascontiguousarray(tab2)
    status, it2 = _run(tab2, basis2, n, tol, max_iter)
    x = np.zeros(n)
    for r, j in enumerate(basis2):
        x[j] = tab2[r, -1]
    value = float(c @ x) if status == "optimal" else -np.inf
    return LPResult(status, x, value, it1 + it2, float(infeas))


def feasible_point(a_eq, b_eq, tol=FEAS_TOL):
    """Some ``x >= 0`` with ``A x = b``, or ``None``."""
    res = solve(np.zeros(np.shape(a_eq)[1]), a_eq, b_eq, tol)
    return None if res.status == "infeasible" else res.x
