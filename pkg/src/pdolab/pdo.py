"""The pseudo-density operator (PDO) type and its basic calculus.

A PDO over ``n`` events is stored as a real correlation tensor ``T`` of
shape ``(d_1**2, ..., d_n**2)``; its operator form is

    R = (1 / prod(d)) * sum_mu T[mu] * s_mu1 (x) ... (x) s_mun

over the generalized Pauli bases of :mod:`pdolab.basis`. Tracing out an
event amounts to fixing its tensor index at 0.
"""

from dataclasses import dataclass, field
from functools import cached_property
from math import prod

import numpy as np

from . import kernels
from .basis import _from_matrix_map, _to_matrix_map, local_eigensystem
from .errors import (
    DimensionMismatchError,
    NotHermitianError,
    SizeCapError,
    TraceError,
    UnknownEventError,
)
from .quasi import QuasiDistribution

ZERO_EIG = 1e-12
MAX_SIDE = 2**10


@dataclass(frozen=True, eq=False)
class Pdo:
    """Space-time state as a correlation tensor.

    Attributes
    ----------
    dims : tuple of int
        Local dimension of every event.
    tensor : ndarray
        Real correlation tensor, shape ``(d_1**2, ..., d_n**2)``, read-only.
    labels : tuple
        Opaque event identifiers; defaults to ``0 .. n-1``.
    """

    dims: tuple
    tensor: np.ndarray
    labels: tuple = field(default=None)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        tensor = np.array(self.tensor, dtype=float)
        expected = tuple(d * d for d in dims)
        if tensor.shape != expected:
            if tensor.size != prod(expected):
                raise DimensionMismatchError(f"tensor of shape {tensor.shape} does not fit dims {dims}")
            tensor = tensor.reshape(expected)
        if abs(tensor[(0,) * len(dims)] - 1.0) > 1e-12:
            raise TraceError(f"T[0,...,0] must be 1, got {tensor[(0,) * len(dims)]!r}")
        tensor.flags.writeable = False
        labels = tuple(range(len(dims))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(dims):
            raise DimensionMismatchError("one label per event required")
        if len(set(labels)) != len(labels):
            raise ValueError(f"event labels must be unique: {labels}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "tensor", tensor)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return len(self.dims)

    @property
    def size(self):
        """Side length of the operator, ``prod(dims)``."""
        return prod(self.dims)

    @cached_property
    def matrix(self):
        m = to_matrix(self)
        m.flags.writeable = False
        return m

    @cached_property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownEventError(label) from None

    def relabel(self, labels):
        return Pdo(self.dims, self.tensor, labels)

    def __repr__(self):
        return f"Pdo(dims={self.dims}, labels={self.labels})"


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order with eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class SeparableExpansion:
    """Quasi-probabilistic mixture of product states.

    ``weights.weights[s_1, ..., s_n]`` multiplies the product of
    ``local_states[i][s_i]`` projectors.
    """

    weights: QuasiDistribution
    local_states: tuple
    dims: tuple
    labels: tuple

    def reassemble(self):
        """Dense operator ``sum_s w[s] (x)_i |a_si><a_si|``."""
        w = self.weights.weights
        projectors = [np.einsum("si,sj->sij", v, v.conj()) for v in self.local_states]
        out = np.zeros((prod(self.dims),) * 2, dtype=np.complex128)
        for idx in zip(*np.nonzero(w)):
            term = projectors[0][idx[0]]
            for i in range(1, len(idx)):
                term = np.kron(term, projectors[i][idx[i]])
            out += w[idx] * term
        return out


@dataclass(frozen=True)
class Purification:
    """Space-time purification ``R = U Tr_anc |Psi><Psi|``."""

    state_vector: np.ndarray
    sign_unitary: np.ndarray
    dims: tuple

    @property
    def norm_squared(self):
        return float(np.vdot(self.state_vector, self.state_vector).real)

    def reduced(self):
        side = prod(self.dims)
        psi = self.state_vector.reshape(side, -1)
        return psi @ psi.conj().T

    def reconstruct(self):
        return self.sign_unitary @ self.reduced()


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    limit: float


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {c.name: {"passed": c.passed, "value": c.value, "limit": c.limit} for c in self.checks}


def _maps(dims, bases, kind):
    if bases is None:
        cache = _to_matrix_map if kind == "to" else _from_matrix_map
        return [cache(d) for d in dims]
    if len(bases) != len(dims) or any(b.dim != d for b, d in zip(bases, dims)):
        raise DimensionMismatchError("basis dimensions do not match the event dimensions")
    out = []
    for b in bases:
        d = b.dim
        ops = np.asarray(b.ops)
        if kind == "to":
            out.append(ops.reshape(d * d, d * d))
        else:
            out.append(np.transpose(ops, (2, 1, 0)).reshape(d * d, d * d))
    return out


def _check_side(dims):
    side = prod(dims)
    if side > MAX_SIDE:
        raise SizeCapError(f"operator side {side} exceeds the cap {MAX_SIDE}")
    return side


def _interleave(n):
    # (i_1..i_n, j_1..j_n) <-> (i_1, j_1, ..., i_n, j_n)
    return [a for k in range(n) for a in (k, n + k)]


def tensor_to_matrix(tensor, dims, bases=None):
    """Dense operator of a correlation tensor (no normalization checks)."""
    dims = tuple(dims)
    n = len(dims)
    shape = [d * d for d in dims]
    _check_side(dims)
    maps = _maps(dims, bases, "to")
    x = np.asarray(tensor, dtype=np.complex128).reshape(shape)
    for k in range(n):
        x = kernels.mode_product(x.reshape(prod(shape[:k]), shape[k], prod(shape[k + 1 :])), maps[k])
    x = x.reshape([v for d in dims for v in (d, d)])
    x = x.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))
    side = prod(dims)
    return x.reshape(side, side) / side


def matrix_to_tensor(m, dims, bases=None):
    """Correlation tensor ``T[mu] = trace(M (x) s_mu)`` of a dense operator (real part)."""
    dims = tuple(dims)
    n = len(dims)
    shape = [d * d for d in dims]
    _check_side(dims)
    maps = _maps(dims, bases, "from")
    x = np.asarray(m, dtype=np.complex128).reshape(list(dims) * 2).transpose(_interleave(n))
    x = np.ascontiguousarray(x).reshape(shape)
    for k in range(n):
        x = kernels.mode_product(x.reshape(prod(shape[:k]), shape[k], prod(shape[k + 1 :])), maps[k])
    return x.reshape(shape).real.copy()


def to_matrix(p, bases=None):
    """Hermitian trace-one operator of ``p``."""
    return tensor_to_matrix(p.tensor, p.dims, bases)


def from_matrix(m, dims, labels=None, bases=None, tol=1e-10):
    """Build a :class:`Pdo` from a Hermitian trace-one matrix."""
    m = np.asarray(m, dtype=np.complex128)
    dims = tuple(int(d) for d in dims)
    side = prod(dims)
    if m.shape != (side, side):
        raise DimensionMismatchError(f"matrix shape {m.shape} does not match dims {dims}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise NotHermitianError("matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > tol:
        raise TraceError(f"trace must be 1, got {tr}")
    t = matrix_to_tensor(m, dims, bases)
    t[(0,) * len(dims)] = 1.0
    return Pdo(dims, t, labels)


def maximally_mixed(dims, labels=None):
    t = np.zeros([d * d for d in dims])
    t[(0,) * len(dims)] = 1.0
    return Pdo(tuple(dims), t, labels)


def tensor_product(p, q, labels=None):
    """``p (x) q`` with events of ``p`` first."""
    t = np.multiply.outer(p.tensor, q.tensor)
    if labels is None:
        labels = p.labels + q.labels
    return Pdo(p.dims + q.dims, t, labels)


def _resolve(p, events):
    positions = []
    for e in events:
        positions.append(p.index(e))
    if len(set(positions)) != len(positions):
        raise ValueError(f"repeated events in {events}")
    return positions


def partial_trace(p, keep):
    """Reduce ``p`` onto the events in ``keep``; result events follow ``keep``'s order."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one event")
    pos = _resolve(p, keep)
    idx = tuple(slice(None) if i in pos else 0 for i in range(p.n))
    sub = p.tensor[idx]
    kept_sorted = sorted(pos)
    sub = np.transpose(sub, [kept_sorted.index(i) for i in pos])
    return Pdo(tuple(p.dims[i] for i in pos), sub, tuple(p.labels[i] for i in pos))


def permute(p, order):
    """Reorder events of ``p`` to follow the label sequence ``order``."""
    order = list(order)
    if len(order) != p.n or set(order) != set(p.labels):
        raise UnknownEventError(f"{order} is not a permutation of {p.labels}")
    return partial_trace(p, order)


def compatibility_deviation(p, q, overlap=None):
    """Max entrywise difference of the reductions of ``p`` and ``q`` on ``overlap``."""
    if overlap is None:
        overlap = [e for e in p.labels if e in q.labels]
    overlap = list(overlap)
    if not overlap:
        return 0.0
    rp = partial_trace(p, overlap)
    rq = partial_trace(q, overlap)
    if rp.dims != rq.dims:
        return float("inf")
    return float(np.max(np.abs(rp.tensor - rq.tensor)))


def compatible(p, q, overlap=None, tol=1e-9):
    """True iff ``p`` and ``q`` have equal reductions on their shared events."""
    return compatibility_deviation(p, q, overlap) <= tol


def spectrum(p):
    vals, vecs = np.linalg.eigh(p.matrix)
    return Spectrum(vals[::-1].copy(), vecs[:, ::-1].copy())


def trace_norm(p):
    return float(np.sum(np.abs(p.eigenvalues)))


def causality_C(p):
    """``(||R||_1 - 1) / 2``; zero exactly for positive semidefinite ``p``."""
    return max(0.0, (trace_norm(p) - 1.0) / 2.0)


def causality_F(p):
    """``log2 ||R||_1``; additive under tensor products."""
    return max(0.0, float(np.log2(trace_norm(p))))


def is_positive(p, tol=1e-10):
    return bool(p.eigenvalues[0] >= -tol)


def tensor_bound(dims):
    return float(np.prod(np.sqrt(np.asarray(dims, dtype=float))))


def validate(p, tol=1e-12):
    """Necessary conditions on a PDO: trace one, entry bound, local positivity.

    These checks never certify that ``p`` is physically realizable.
    """
    t0 = float(p.tensor[(0,) * p.n])
    bound = tensor_bound(p.dims)
    tmax = float(np.max(np.abs(p.tensor)))
    local_min = min(float(np.linalg.eigvalsh(to_matrix(partial_trace(p, [e])))[0]) for e in p.labels)
    return ValidationReport(
        (
            Check("trace_one", abs(t0 - 1.0) <= tol, abs(t0 - 1.0), tol),
            Check("tensor_bound", tmax <= bound + tol, tmax, bound),
            Check("local_positivity", local_min >= -tol, local_min, -tol),
        )
    )


def _local_states(d):
    """Distinct eigenvectors over all basis elements plus the (mu, k) -> state map."""
    states = []
    columns = []
    for mu in range(d * d):
        lams, vecs = local_eigensystem(d, mu)
        for k in range(d):
            v = vecs[k]
            for s, w in enumerate(states):
                if abs(abs(np.vdot(w, v)) - 1.0) < 1e-10:
                    break
            else:
                states.append(v)
                columns.append(np.zeros(d * d))
                s = len(states) - 1
            columns[s][mu] += lams[k]
    coeff = np.stack(columns, axis=1)
    return np.array(states), coeff


def separable_expansion(p):
    """Expand ``p`` over products of local basis eigenstates.

    Each basis operator is split into rank-1 eigenprojectors, so the weight
    of the product of local states ``(s_1, ..., s_n)`` is
    ``(1/prod d) sum_mu T[mu] prod_i lam(mu_i -> s_i)``. Weights are real
    and sum to one; negative weights signal non-separability.
    """
    w = np.asarray(p.tensor, dtype=float)
    states = []
    for axis, d in enumerate(p.dims):
        vecs, coeff = _local_states(d)
        states.append(vecs)
        w = np.moveaxis(np.tensordot(w, coeff, axes=([axis], [0])), -1, axis)
    w = w / p.size
    return SeparableExpansion(QuasiDistribution(w), tuple(states), p.dims, p.labels)


def purify(p):
    """Space-time purification: ``|Psi> = sum sqrt|lam_i| |psi_i>|e_i>``, ``U = sum sign(lam_i) |psi_i><psi_i|``."""
    vals, vecs = np.linalg.eigh(p.matrix)
    signs = np.where(vals < -ZERO_EIG, -1.0, 1.0)
    side = p.size
    amps = np.sqrt(np.abs(vals))
    psi = (vecs * amps).reshape(side, side)  # psi[sys, anc]
    u = (vecs * signs) @ vecs.conj().T
    return Purification(psi.reshape(-1), u, p.dims)


def to_json(p):
    return {
        "version": 1,
        "dims": list(p.dims),
        "labels": list(p.labels),
        "tensor": [float(x) for x in p.tensor.ravel()],
    }


def from_json(obj):
    if obj.get("version", 1) != 1:
        raise ValueError(f"unsupported Pdo version {obj.get('version')}")
    dims = tuple(obj["dims"])
    labels = obj.get("labels")
    return Pdo(dims, np.array(obj["tensor"], dtype=float).reshape([d * d for d in dims]), labels)
