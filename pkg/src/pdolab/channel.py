"""Pseudo-channels: Hermiticity- and trace-preserving linear maps.

A channel is stored as weighted Kraus pairs ``Phi(R) = sum_a w_a A_a R A_a^dag``
with ``sum_a w_a A_a^dag A_a = I``; negative weights are allowed. The
normalized Choi operator ``J = (1/d_in) sum_ij Phi(E_ij) (x) E_ij`` (output
factor first) has unit trace, so it can be handled as a PDO over the output
events followed by the input events.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product as iproduct
from math import ceil, prod

import numpy as np

from . import jsonio
from . import pdo as P
from .errors import (
    DimensionMismatchError,
    NoMarginalChannelError,
    NoSteadyStateError,
    NotHermitianError,
    NotTracePreservingError,
)
from .marginal import MarginalScenario, SolutionFamily, solve_herm1

TP_TOL = 1e-10
FACTOR_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PseudoChannel:
    """HPTP map between event sets in weighted-Kraus form.

    Parameters
    ----------
    in_dims, out_dims : tuple of int
    kraus : sequence of (weight, matrix)
        Matrices are ``prod(out_dims) x prod(in_dims)``.
    in_labels, out_labels : tuple, optional
    """

    in_dims: tuple
    out_dims: tuple
    kraus: tuple
    in_labels: tuple = None
    out_labels: tuple = None
    tol: float = field(default=TP_TOL, repr=False)

    def __post_init__(self):
        in_dims = tuple(int(d) for d in self.in_dims)
        out_dims = tuple(int(d) for d in self.out_dims)
        d_in, d_out = prod(in_dims), prod(out_dims)
        ops = []
        for w, a in self.kraus:
            a = np.array(a, dtype=np.complex128)
            if a.shape != (d_out, d_in):
                raise DimensionMismatchError(f"Kraus operator of shape {a.shape}, expected {(d_out, d_in)}")
            if np.iscomplexobj(w) and np.imag(w) != 0:
                raise NotHermitianError("Kraus weights must be real")
            a.flags.writeable = False
            ops.append((float(np.real(w)), a))
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        tp = sum(w * a.conj().T @ a for w, a in ops)
        dev = float(np.max(np.abs(tp - np.eye(d_in))))
        if dev > self.tol:
            raise NotTracePreservingError(f"sum w A^dag A deviates from the identity by {dev:.3g}")
        in_labels = tuple(f"in{k}" for k in range(len(in_dims))) if self.in_labels is None else tuple(self.in_labels)
        out_labels = tuple(f"out{k}" for k in range(len(out_dims))) if self.out_labels is None else tuple(self.out_labels)
        if len(in_labels) != len(in_dims) or len(out_labels) != len(out_dims):
            raise DimensionMismatchError("one label per event required")
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)
        object.__setattr__(self, "kraus", tuple(ops))
        object.__setattr__(self, "in_labels", in_labels)
        object.__setattr__(self, "out_labels", out_labels)

    @property
    def d_in(self):
        return prod(self.in_dims)

    @property
    def d_out(self):
        return prod(self.out_dims)

    @property
    def weights(self):
        return np.array([w for w, _ in self.kraus])

    @cached_property
    def choi(self):
        m = choi(self)
        m.flags.writeable = False
        return m

    def __call__(self, p):
        return apply(self, p)

    def __repr__(self):
        return f"PseudoChannel(in_dims={self.in_dims}, out_dims={self.out_dims}, kraus={len(self.kraus)})"


def apply_matrix(c, r):
    return sum(w * (a @ r @ a.conj().T) for w, a in c.kraus)


def apply(c, p):
    """``Phi(R)`` as a PDO on the output events.

    Endomorphic channels keep the input labels unless output labels were given.
    """
    if tuple(p.dims) != c.in_dims:
        raise DimensionMismatchError(f"channel expects dims {c.in_dims}, got {p.dims}")
    out = apply_matrix(c, p.matrix)
    out = (out + out.conj().T) / 2
    labels = p.labels if c.out_dims == c.in_dims and c.out_labels == _default("out", len(c.out_dims)) else c.out_labels
    return P.from_matrix(out, c.out_dims, labels, tol=1e-8)


def _default(prefix, n):
    return tuple(f"{prefix}{k}" for k in range(n))


def choi(c):
    """Normalized Choi matrix ``(1/d_in) sum w vec(A) vec(A)^dag`` (output index first)."""
    vecs = np.stack([a.reshape(-1) for _, a in c.kraus])
    return np.einsum("a,ai,aj->ij", c.weights, vecs, vecs.conj()) / c.d_in


def choi_labels(c):
    return tuple(f"out:{l}" for l in c.out_labels) + tuple(f"in:{l}" for l in c.in_labels)


def choi_pdo(c):
    """The Choi operator as a PDO over output events followed by input events."""
    return P.from_matrix(c.choi, c.out_dims + c.in_dims, choi_labels(c), tol=1e-9)


def apply_choi(j, r, d_in, d_out):
    """``d_in Tr_in[J (I (x) R^T)]``."""
    j4 = np.asarray(j).reshape(d_out, d_in, d_out, d_in)
    return d_in * np.einsum("aibj,ij->ab", j4, np.asarray(r))


def from_choi(j, in_dims, out_dims, tol=1e-9, in_labels=None, out_labels=None):
    """Weighted Kraus form from the eigendecomposition of a normalized Choi matrix."""
    in_dims, out_dims = tuple(in_dims), tuple(out_dims)
    d_in, d_out = prod(in_dims), prod(out_dims)
    j = np.asarray(j, dtype=np.complex128)
    if j.shape != (d_in * d_out,) * 2:
        raise DimensionMismatchError(f"Choi matrix of shape {j.shape} does not fit {out_dims} x {in_dims}")
    if np.max(np.abs(j - j.conj().T)) > tol:
        raise NotHermitianError("Choi matrix is not Hermitian")
    tr_out = np.einsum("aiaj->ij", j.reshape(d_out, d_in, d_out, d_in))
    dev = float(np.max(np.abs(tr_out - np.eye(d_in) / d_in)))
    if dev > tol:
        raise NotTracePreservingError(f"Tr_out J deviates from I/d_in by {dev:.3g}")
    vals, vecs = np.linalg.eigh((j + j.conj().T) / 2)
    kraus = []
    for lam, v in zip(vals, vecs.T):
        if abs(lam) < 1e-14:
            continue
        kraus.append((float(np.sign(lam)), np.sqrt(abs(lam) * d_in) * v.reshape(d_out, d_in)))
    return PseudoChannel(in_dims, out_dims, kraus, in_labels, out_labels, tol=max(TP_TOL, 10 * tol))


def from_choi_pdo(p):
    """Inverse of :func:`choi_pdo`; events are split by their ``out:`` / ``in:`` prefixes."""
    outs = [i for i, l in enumerate(p.labels) if str(l).startswith("out:")]
    ins = [i for i, l in enumerate(p.labels) if str(l).startswith("in:")]
    if len(outs) + len(ins) != p.n or outs != list(range(len(outs))):
        raise ValueError("Choi PDO events must be 'out:' labels followed by 'in:' labels")
    return from_choi(
        p.matrix,
        tuple(p.dims[i] for i in ins),
        tuple(p.dims[i] for i in outs),
        in_labels=tuple(str(p.labels[i])[3:] for i in ins),
        out_labels=tuple(str(p.labels[i])[4:] for i in outs),
    )


def marginal_channel(c, keep_in, keep_out, tol=FACTOR_TOL):
    """Channel between the kept input and output events, when it exists.

    ``keep_in`` and ``keep_out`` are positions into the input and output
    events. The Choi operator reduced onto the kept outputs must factor as
    ``J' (x) I/d`` over the discarded inputs; in the tensor picture every
    entry with a nonzero index on a discarded input must vanish.
    """
    keep_in, keep_out = list(keep_in), list(keep_out)
    if not keep_in or not keep_out:
        raise ValueError("marginal channel needs at least one input and one output event")
    n_out = len(c.out_dims)
    jt = choi_pdo(c)
    keep_y = [jt.labels[k] for k in keep_out]
    all_in = [jt.labels[n_out + k] for k in range(len(c.in_dims))]
    jy = P.partial_trace(jt, keep_y + all_in)
    drop = [k for k in range(len(c.in_dims)) if k not in keep_in]
    t = np.asarray(jy.tensor)
    if drop:
        nz = np.zeros(t.shape, dtype=bool)
        idx = np.indices(t.shape)
        for k in drop:
            nz |= idx[len(keep_y) + k] != 0
        residual = float(np.max(np.abs(t[nz]), initial=0.0))
    else:
        residual = 0.0
    if residual > tol:
        raise NoMarginalChannelError(f"reduced Choi operator does not factor (residual {residual:.3g})", residual)
    kept = P.partial_trace(jy, keep_y + [jt.labels[n_out + k] for k in keep_in])
    return from_choi(
        kept.matrix,
        tuple(c.in_dims[k] for k in keep_in),
        tuple(c.out_dims[k] for k in keep_out),
        tol=max(1e-9, tol),
        in_labels=tuple(c.in_labels[k] for k in keep_in),
        out_labels=tuple(c.out_labels[k] for k in keep_out),
    )


def solve_channel_marginal(parts):
    """Solution family over Choi tensors for compatible channel marginals.

    Each part is mapped to its Choi PDO (labels ``out:<label>`` and
    ``in:<label>``) and the state marginal problem is solved. Free entries
    whose output indices are all 0 are then pinned to 0, which makes every
    completion trace preserving.
    """
    scen = MarginalScenario(tuple(choi_pdo(c) for c in parts))
    fam = solve_herm1(scen)
    is_out = np.array([str(l).startswith("out:") for l in fam.labels])
    idx = np.indices(fam.fixed.shape)
    out_zero = np.all(idx[is_out] == 0, axis=0) if is_out.any() else np.ones(fam.fixed.shape, dtype=bool)
    pin = out_zero & ~fam.mask
    mask = fam.mask | pin
    source = np.where(pin, -2, fam.source)
    fixed = np.where(pin, 0.0, fam.fixed)
    return SolutionFamily(fam.dims, fam.labels, fixed, mask, source), scen


def channel_from_completion(p):
    """Reorder a completed Choi PDO (outputs first) and convert it to a channel."""
    outs = [l for l in p.labels if str(l).startswith("out:")]
    ins = [l for l in p.labels if str(l).startswith("in:")]
    return from_choi_pdo(P.permute(p, outs + ins))


def tp_residual(p):
    """Largest deviation of ``Tr_out J`` from ``I/d_in`` for a Choi PDO."""
    ins = [l for l in p.labels if str(l).startswith("in:")]
    red = P.partial_trace(p, ins)
    t = np.array(red.tensor)
    t[(0,) * red.n] -= 1.0
    return float(np.max(np.abs(t)))


# common channels -------------------------------------------------------------


def identity_channel(dims):
    d = prod(dims)
    return PseudoChannel(tuple(dims), tuple(dims), [(1.0, np.eye(d))])


def unitary_channel(u, dims=None):
    u = np.asarray(u, dtype=np.complex128)
    dims = (u.shape[0],) if dims is None else tuple(dims)
    return PseudoChannel(dims, dims, [(1.0, u)])


def depolarizing(d):
    """Completely depolarizing channel ``R -> Tr(R) I/d``."""
    ops = [(1.0 / d, np.outer(np.eye(d)[i], np.eye(d)[j])) for i in range(d) for j in range(d)]
    return PseudoChannel((d,), (d,), ops)


def transpose_map():
    """Qubit transpose as a pseudo-channel: weights (1/2, 1/2, 1/2, -1/2) on (I, X, Z, Y)."""
    i = np.eye(2)
    x = np.array([[0, 1], [1, 0]])
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1, -1])
    return PseudoChannel((2,), (2,), [(0.5, i), (0.5, x), (0.5, z), (-0.5, y)])


def swap_channel(d=2):
    s = np.zeros((d * d, d * d))
    for i, j in iproduct(range(d), range(d)):
        s[j * d + i, i * d + j] = 1.0
    return PseudoChannel((d, d), (d, d), [(1.0, s)])


def tensor_channel(c1, c2):
    ops = [(w1 * w2, np.kron(a1, a2)) for (w1, a1), (w2, a2) in iproduct(c1.kraus, c2.kraus)]
    return PseudoChannel(
        c1.in_dims + c2.in_dims,
        c1.out_dims + c2.out_dims,
        ops,
        _join(c1.in_labels, c2.in_labels, "in"),
        _join(c1.out_labels, c2.out_labels, "out"),
    )


def _join(a, b, prefix):
    joined = a + b
    return joined if len(set(joined)) == len(joined) else _default(prefix, len(joined))


def replacement_channel(state, d_in):
    """``R -> Tr(R) * state``."""
    state = np.asarray(state, dtype=np.complex128)
    vals, vecs = np.linalg.eigh(state)
    ops = []
    for lam, v in zip(vals, vecs.T):
        if abs(lam) < 1e-15:
            continue
        for j in range(d_in):
            ops.append((float(np.sign(lam)), np.sqrt(abs(lam)) * np.outer(v, np.eye(d_in)[j])))
    return PseudoChannel((d_in,), (state.shape[0],), ops)


# other representations ---------------------------------------------------------


def natural(c):
    """Matrix of ``vec(R) -> vec(Phi(R))`` for row-major vectorization."""
    return sum(w * np.kron(a, a.conj()) for w, a in c.kraus)


def stinespring(c):
    """Pair ``(A, B)`` with ``Phi(R) = Tr_anc(A R B^dag)`` and ``A^dag B = I``.

    ``A = sum w_a A_a (x) e_a`` and ``B = sum A_a (x) e_a`` stack the weighted
    and plain Kraus operators over an ancilla of size ``len(kraus)``.
    """
    r = len(c.kraus)
    a = np.zeros((c.d_out * r, c.d_in), dtype=np.complex128)
    b = np.zeros_like(a)
    for k, (w, op) in enumerate(c.kraus):
        e = np.zeros((r, 1))
        e[k] = 1.0
        a += w * np.kron(op, e)
        b += np.kron(op, e)
    return a, b


def apply_stinespring(a, b, r, d_out):
    full = a @ r @ b.conj().T
    anc = full.shape[0] // d_out
    return np.einsum("iaja->ij", full.reshape(d_out, anc, d_out, anc))


# no-cloning ----------------------------------------------------------------------


def _tn(m):
    return float(np.sum(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2))))


def no_cloning_check(candidates, test_pdos, mix=0.5, tol=1e-9):
    """Linearity and cloning residuals of one-to-two event maps.

    For each candidate, reports ``||Phi(p R1 + (1-p) R2) - p Phi(R1) - (1-p) Phi(R2)||_1``
    and ``||Phi(R) - R (x) R||_1`` for every test state and for the mixture.
    """
    if len(test_pdos) < 2:
        raise ValueError("need at least two test states")
    r1, r2 = test_pdos[0].matrix, test_pdos[1].matrix
    mixed = mix * r1 + (1 - mix) * r2
    states = [t.matrix for t in test_pdos] + [mixed]
    rows = []
    for c in candidates:
        if len(c.in_dims) != 1 or c.out_dims != (c.in_dims[0],) * 2:
            raise DimensionMismatchError("cloning candidates must map one event to two copies of it")
        lin = _tn(apply_matrix(c, mixed) - mix * apply_matrix(c, r1) - (1 - mix) * apply_matrix(c, r2))
        clone = [_tn(apply_matrix(c, s) - np.kron(s, s)) for s in states]
        rows.append({"linearity": lin, "cloning": clone, "clones_all": all(x <= tol for x in clone)})
    return {"candidates": rows, "any_clones_all": any(r["clones_all"] for r in rows), "mix": mix}


# Lindblad dynamics -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Lindbladian:
    """``L(R) = -i[H, R] + sum g (A R A^dag - {A^dag A, R}/2)`` with real rates ``g``."""

    dims: tuple
    hamiltonian: np.ndarray = None
    jumps: tuple = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        d = prod(dims)
        h = np.zeros((d, d), dtype=np.complex128) if self.hamiltonian is None else np.array(self.hamiltonian, dtype=np.complex128)
        if h.shape != (d, d):
            raise DimensionMismatchError("Hamiltonian size does not match dims")
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise NotHermitianError("Hamiltonian must be Hermitian")
        jumps = []
        for g, a in self.jumps:
            a = np.array(a, dtype=np.complex128)
            if a.shape != (d, d):
                raise DimensionMismatchError("jump operator size does not match dims")
            jumps.append((float(g), a))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))

    def __call__(self, r):
        h = self.hamiltonian
        out = -1j * (h @ r - r @ h)
        for g, a in self.jumps:
            ada = a.conj().T @ a
            out = out + g * (a @ r @ a.conj().T - 0.5 * (ada @ r + r @ ada))
        return out

    def superoperator(self):
        """Generator matrix for row-major ``vec``."""
        d = prod(self.dims)
        eye = np.eye(d)
        h = self.hamiltonian
        s = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for g, a in self.jumps:
            ada = a.conj().T @ a
            s = s + g * (np.kron(a, a.conj()) - 0.5 * np.kron(ada, eye) - 0.5 * np.kron(eye, ada.T))
        return s


def dephasing(gamma=1.0):
    return Lindbladian((2,), None, ((gamma, np.diag([1.0, -1.0])),))


def amplitude_damping(gamma=1.0):
    return Lindbladian((2,), None, ((gamma, np.array([[0.0, 1.0], [0.0, 0.0]])),))


def evolve_matrix(l, r, tau, dt):
    if dt <= 0:
        raise ValueError("step must be positive")
    steps = max(1, ceil(tau / dt - 1e-12)) if tau > 0 else 0
    h = tau / steps if steps else 0.0
    r = np.array(r, dtype=np.complex128)
    for _ in range(steps):
        k1 = l(r)
        k2 = l(r + h / 2 * k1)
        k3 = l(r + h / 2 * k2)
        k4 = l(r + h * k3)
        r = r + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return r


def evolve(l, p, tau, dt):
    """Fixed-step fourth-order Runge-Kutta integration of ``dR/dt = L(R)``."""
    if tuple(p.dims) != l.dims:
        raise DimensionMismatchError("generator and PDO dims differ")
    r = evolve_matrix(l, p.matrix, tau, dt)
    return P.from_matrix((r + r.conj().T) / 2, p.dims, p.labels, tol=1e-8)


def steady_state(l, tol=1e-10):
    """Trace-one Hermitian kernel element of the generator closest to ``I/d``.

    Among several stationary operators this is the one with the largest
    order-2 Renyi entropy; for a trivial generator it is ``I/d``.
    """
    d = prod(l.dims)
    s = l.superoperator()
    _, sv, vh = np.linalg.svd(s)
    scale = max(1.0, sv[0])
    kernel = vh[sv <= tol * scale].conj()
    if kernel.size == 0:
        raise NoSteadyStateError("generator has a trivial kernel")
    # real coordinates of the Hermitian parts spanning the kernel
    herm = []
    for v in kernel:
        k = v.reshape(d, d)
        herm.extend([(k + k.conj().T) / 2, 1j * (k - k.conj().T) / 2])
    coords = np.array([P.matrix_to_tensor(h, l.dims).ravel() for h in herm])
    u, cs, vt = np.linalg.svd(coords, full_matrices=False)
    basis = vt[cs > tol * max(1.0, cs[0])]
    # trace is coordinate 0; the closest trace-one point to I/d is proportional to that column
    t = basis[:, 0]
    if np.linalg.norm(t) < tol:
        raise NoSteadyStateError("kernel contains no operator with nonzero trace")
    coef = t / (t @ t)
    x = coef @ basis
    x[0] = 1.0
    p = P.Pdo(l.dims, x.reshape([dd * dd for dd in l.dims]))
    res = float(np.max(np.abs(l(p.matrix))))
    if res > 1e-9:
        raise NoSteadyStateError(f"stationarity residual {res:.3g}")
    return p


# json --------------------------------------------------------------------------------


def to_json(c):
    return {
        "version": 1,
        "in_dims": list(c.in_dims),
        "out_dims": list(c.out_dims),
        "kraus": [{"weight": w, "matrix": jsonio.encode_matrix(a)} for w, a in c.kraus],
        "in_labels": list(c.in_labels),
        "out_labels": list(c.out_labels),
    }


def from_json(obj, source="<input>"):
    if obj.get("version", 1) != 1:
        raise jsonio.ParseError(f"{source}: unsupported channel version {obj.get('version')}")
    kraus = [(float(jsonio.field(k, "weight", source)), jsonio.decode_matrix(jsonio.field(k, "matrix", source))) for k in jsonio.field(obj, "kraus", source)]
    in_labels, out_labels = obj.get("in_labels"), obj.get("out_labels")
    return PseudoChannel(
        tuple(jsonio.field(obj, "in_dims", source)),
        tuple(jsonio.field(obj, "out_dims", source)),
        kraus,
        None if in_labels is None else tuple(in_labels),
        None if out_labels is None else tuple(out_labels),
    )


def lindbladian_to_json(l):
    return {
        "version": 1,
        "dims": list(l.dims),
        "hamiltonian": jsonio.encode_matrix(l.hamiltonian),
        "jumps": [{"rate": g, "operator": jsonio.encode_matrix(a)} for g, a in l.jumps],
    }


def lindbladian_from_json(obj, source="<input>"):
    h = obj.get("hamiltonian")
    jumps = tuple(
        (float(jsonio.field(j, "rate", source)), jsonio.decode_matrix(jsonio.field(j, "operator", source))) for j in obj.get("jumps", [])
    )
    return Lindbladian(tuple(jsonio.field(obj, "dims", source)), None if h is None else jsonio.decode_matrix(h), jumps)
