"""Space-time entropies of PDOs (base-2 logarithms throughout).

The entropy treats the spectrum as a quasi-probability vector:
``S(R) = -sum |lam| log2 |lam|`` with ``0 log 0 = 0``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import pdo as P
from .errors import DimensionMismatchError
from .samplers import random_unitary

EQ_TOL = 1e-9
INEQ_TOL = 1e-8


def _xlogx(x):
    x = np.abs(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    nz = x > 0
    out[nz] = x[nz] * np.log2(x[nz])
    return out


def spectral_entropy(values):
    """``-sum |v| log2 |v|`` of any real vector."""
    return float(-np.sum(_xlogx(values)))


def matrix_entropy(m):
    return spectral_entropy(np.linalg.eigvalsh(m))


def entropy(p):
    return spectral_entropy(p.eigenvalues)


def renyi(p, alpha):
    """``log2(sum |lam|**alpha) / (1 - alpha)`` for ``alpha > 0``, ``alpha != 1``."""
    if alpha <= 0 or alpha == 1:
        raise ValueError(f"Renyi order must be positive and different from 1, got {alpha}")
    lam = np.abs(p.eigenvalues)
    lam = lam[lam > 0]
    return float(np.log2(np.sum(lam**alpha)) / (1.0 - alpha)) + 0.0  # no -0.0 for pure states


def shannon(prob):
    return spectral_entropy(prob)


def conditional_mutual(joint, a, b=None):
    """``(S(A|B), I(A:B))`` for the bipartition ``a | b`` of the events."""
    a = list(a)
    b = [e for e in joint.labels if e not in a] if b is None else list(b)
    if not a or not b or set(a) & set(b) or set(a) | set(b) != set(joint.labels) or len(a) + len(b) != joint.n:
        raise ValueError(f"{a} | {b} is not a bipartition of {joint.labels}")
    s_ab = entropy(joint)
    s_a = entropy(P.partial_trace(joint, a))
    s_b = entropy(P.partial_trace(joint, b))
    return s_ab - s_b, s_a + s_b - s_ab


def _abs_eig(m):
    vals, vecs = np.linalg.eigh(m)
    return np.abs(vals), vecs


def _log_abs(m, eps):
    """``log2 |M|``, with ``|M| + eps I`` when ``|M|`` is singular."""
    mags, vecs = _abs_eig(m)
    if mags.min() < eps:
        mags = mags + eps
    return (vecs * np.log2(mags)) @ vecs.conj().T


def relative_entropy_matrices(m1, m2, eps=1e-12):
    mags1, vecs1 = _abs_eig(m1)
    abs1 = (vecs1 * mags1) @ vecs1.conj().T
    return float(np.sum(_xlogx(mags1)) - np.real(np.trace(abs1 @ _log_abs(m2, eps))))


def relative_entropy(p, q, eps=1e-12):
    """``Tr|R1| log2|R1| - Tr|R1| log2|R2|``."""
    if p.dims != q.dims:
        raise DimensionMismatchError("relative entropy needs matching dims")
    return relative_entropy_matrices(p.matrix, q.matrix, eps)


def _abs_matrix(m):
    mags, vecs = _abs_eig(m)
    return (vecs * mags) @ vecs.conj().T


def _norm1(p):
    return P.trace_norm(p)


def entropy_identity(p):
    """``|S - (2C + 1)(H(prob) - F)|`` with ``prob = |lam| / ||R||_1``."""
    lam = np.abs(p.eigenvalues)
    n1 = lam.sum()
    prob = lam / n1
    c = (n1 - 1) / 2
    f = np.log2(n1)
    return abs(entropy(p) - (2 * c + 1) * (shannon(prob) - f))


@dataclass
class EntropyReport:
    S: float
    C: float
    F: float
    p_vec: list
    renyi: dict = field(default_factory=dict)
    identity_residual: float = 0.0

    def to_dict(self):
        return {
            "S": self.S,
            "C": self.C,
            "F": self.F,
            "p_vec": list(self.p_vec),
            "renyi": {str(k): v for k, v in self.renyi.items()},
            "identity_residual": self.identity_residual,
        }


def report(p, alphas=(2.0,)):
    lam = np.abs(p.eigenvalues)
    return EntropyReport(
        S=entropy(p),
        C=P.causality_C(p),
        F=P.causality_F(p),
        p_vec=[float(x) for x in sorted(lam / lam.sum(), reverse=True)],
        renyi={float(a): renyi(p, a) for a in alphas},
        identity_residual=entropy_identity(p),
    )


@dataclass
class InequalityReport:
    """Residuals; inequalities hold when >= -1e-8, equalities when |r| <= 1e-9."""

    equalities: dict
    inequalities: dict
    skipped: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(abs(v) <= EQ_TOL for v in self.equalities.values()) and all(
            v >= -INEQ_TOL for v in self.inequalities.values()
        )

    def to_dict(self):
        return {"equalities": self.equalities, "inequalities": self.inequalities, "skipped": self.skipped, "ok": self.ok}


def weak_subadditivity_residual(joint, a=None, eps=1e-12):
    """``S(A) + S(B) - S(AB) - Delta - Tr(|R_AB| - |R_A| (x) |R_B|)`` for a bipartition.

    The split defaults to the first event versus the rest; events are
    reordered so ``A`` comes first.
    """
    a = [joint.labels[0]] if a is None else list(a)
    b = [e for e in joint.labels if e not in a]
    joint = P.permute(joint, a + b)
    ra, rb = P.partial_trace(joint, a), P.partial_trace(joint, b)
    prod_abs = np.kron(_abs_matrix(ra.matrix), _abs_matrix(rb.matrix))
    abs_ab = _abs_matrix(joint.matrix)
    diff = abs_ab - prod_abs
    delta = float(np.real(np.trace(diff @ _log_abs(prod_abs, eps))))
    lhs = entropy(ra) + entropy(rb) - entropy(joint)
    return lhs - delta - float(np.real(np.trace(diff)))


def klein_residual(p, q, eps=1e-12):
    """``S(p || q) - 2 (C(p) - C(q))``."""
    return relative_entropy(p, q, eps) - (_norm1(p) - _norm1(q))


def check_inequalities(p, q, mix=0.5, seed=0, eps=1e-12):
    """Evaluate the entropy identities and inequalities on ``p`` and ``q``.

    Checks that need matching dims or two events are skipped (with the
    reason recorded) when the inputs do not allow them.
    """
    if not 0 <= mix <= 1:
        raise ValueError("mixing weight must lie in [0, 1]")
    eq, ineq, skipped = {}, {}, {}
    u = random_unitary(p.size, seed)
    eq["unitary_invariance"] = matrix_entropy(u @ p.matrix @ u.conj().T) - entropy(p)
    s_pq = entropy(P.tensor_product(p, q, labels=tuple(range(p.n + q.n))))
    eq["weak_additivity"] = s_pq - (_norm1(q) * entropy(p) + _norm1(p) * entropy(q))
    if p.dims == q.dims:
        mixed = mix * _abs_matrix(p.matrix) + (1 - mix) * _abs_matrix(q.matrix)
        ineq["weak_concavity"] = matrix_entropy(mixed) - mix * entropy(p) - (1 - mix) * entropy(q)
        ineq["klein"] = klein_residual(p, q, eps)
    else:
        skipped["weak_concavity"] = skipped["klein"] = "dims differ"
    if p.n >= 2:
        ineq["weak_subadditivity"] = weak_subadditivity_residual(p, eps=eps)
    else:
        skipped["weak_subadditivity"] = "needs at least two events"
    eq["identity"] = entropy_identity(p)
    return InequalityReport(eq, ineq, skipped)


def qubit_state(r, axis=(0.0, 0.0, 1.0)):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1.0, -1.0]).astype(complex)
    return (np.eye(2) + r * (axis[0] * x + axis[1] * y + axis[2] * z)) / 2


def qubit_curve(rs):
    """Entropy of the two-time identity-channel PDO for Bloch radii ``rs``.

    Returns rows ``(r, S, closed_form)`` where the closed form uses the
    spectrum ``(-1/2, 1/2, (1+r)/2, (1-r)/2)``.
    """
    from .circuit import temporal_two_event

    rows = []
    for r in rs:
        p = temporal_two_event(qubit_state(r), [np.eye(2)])
        closed = spectral_entropy([-0.5, 0.5, (1 + r) / 2, (1 - r) / 2])
        rows.append((float(r), entropy(p), closed))
    return rows
