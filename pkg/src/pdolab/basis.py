"""Generalized Pauli (Gell-Mann) operator bases.

Every basis element is Hermitian and normalized so that
``trace(s_mu @ s_nu) == d * delta(mu, nu)``; element 0 is the identity.
For ``d == 2`` the basis is exactly ``[I, X, Y, Z]``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidDimensionError


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Ordered Hermitian operator basis of a ``dim``-level system.

    Attributes
    ----------
    dim : int
        Local dimension ``d``.
    ops : ndarray, shape (d**2, d, d)
        Basis elements, read-only.
    """

    dim: int
    ops: np.ndarray

    def __post_init__(self):
        ops = np.array(self.ops, dtype=np.complex128)
        if ops.shape != (self.dim**2, self.dim, self.dim):
            raise InvalidDimensionError(f"expected {self.dim**2} operators of size {self.dim}, got {ops.shape}")
        ops.flags.writeable = False
        object.__setattr__(self, "ops", ops)

    def __len__(self):
        return len(self.ops)

    def __getitem__(self, mu):
        return self.ops[mu]

    def coefficients(self, m):
        """Real expansion coefficients ``trace(m @ s_mu)`` of a Hermitian matrix."""
        return np.real(np.einsum("ij,mji->m", m, self.ops))

    def reconstruct(self, coeffs):
        return np.einsum("m,mij->ij", np.asarray(coeffs), self.ops) / self.dim


def _gell_mann(d):
    """Identity, then symmetric, antisymmetric and diagonal Gell-Mann matrices (trace-2 convention)."""
    mats = [np.eye(d, dtype=np.complex128)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = m[k, j] = 1.0
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = -1j
        m[k, j] = 1j
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag * np.sqrt(2.0 / (l * (l + 1)))).astype(np.complex128))
    return mats


@lru_cache(maxsize=None)
def make_basis(d):
    """Build the generalized Pauli basis for local dimension ``d``.

    Non-identity elements are the standard Gell-Mann matrices rescaled by
    ``sqrt(d / 2)``. For qubits this reproduces ``I, X, Y, Z`` in that order.
    """
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"local dimension must be an integer >= 2, got {d}")
    d = int(d)
    mats = _gell_mann(d)
    scale = np.sqrt(d / 2.0)
    ops = np.stack([mats[0]] + [m * scale for m in mats[1:]])
    return OperatorBasis(d, ops)


def check_basis(b):
    """Largest absolute violation of each basis invariant.

    Returns a dict with keys ``identity``, ``traceless``, ``orthogonality``
    and ``hermiticity``.
    """
    ops = np.asarray(b.ops)
    d = b.dim
    gram = np.einsum("aij,bji->ab", ops, ops)
    traces = np.einsum("aii->a", ops)
    return {
        "identity": float(np.max(np.abs(ops[0] - np.eye(d)))),
        "traceless": float(np.max(np.abs(traces[1:]))) if len(ops) > 1 else 0.0,
        "orthogonality": float(np.max(np.abs(gram - d * np.eye(len(ops))))),
        "hermiticity": float(np.max(np.abs(ops - np.conj(np.transpose(ops, (0, 2, 1)))))),
    }


@lru_cache(maxsize=None)
def _to_matrix_map(d):
    # row mu holds s_mu flattened as (i, j)
    m = make_basis(d).ops.reshape(d * d, d * d).copy()
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def _from_matrix_map(d):
    # column mu holds s_mu[j, i] flattened as (i, j), so sum_ij R[i, j] s[j, i] = trace(R s)
    ops = make_basis(d).ops
    m = np.transpose(ops, (2, 1, 0)).reshape(d * d, d * d).copy()
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def local_eigensystem(d, mu):
    """Rank-1 spectral decomposition ``s_mu = sum_k lam_k |v_k><v_k|``.

    The identity uses the computational basis. Returns ``(lams, vecs)``
    with eigenvectors as rows.
    """
    if mu == 0:
        return np.ones(d), np.eye(d, dtype=np.complex128)
    lams, vecs = np.linalg.eigh(make_basis(d).ops[mu])
    return lams, vecs.T.copy()


@lru_cache(maxsize=None)
def luders_projectors(d, mu, tol=1e-9):
    """Eigenspace projectors of ``s_mu`` grouped by distinct eigenvalue.

    Returns a tuple of ``(eigenvalue, projector)`` pairs in ascending order.
    """
    lams, vecs = np.linalg.eigh(make_basis(d).ops[mu])
    groups = []
    start = 0
    for k in range(1, d + 1):
        if k == d or abs(lams[k] - lams[start]) > tol:
            v = vecs[:, start:k]
            groups.append((float(np.mean(lams[start:k])), v @ v.conj().T))
            start = k
    return tuple(groups)
