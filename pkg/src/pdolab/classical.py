"""Classical (quasi-probability) marginal problems.

The chordal solver orders the maximal cliques of the compatibility graph
along a clique tree and glues clique distributions with the conditional
product ``p(new | separator) = p(clique) / p(separator)``.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from . import pdo as P
from .basis import make_basis
from .errors import (
    DimensionMismatchError,
    IncompatibleError,
    IncompleteBasisError,
    NotChordalError,
    UnknownEventError,
    ZeroSeparatorError,
)
from .quasi import QuasiDistribution, marginalize

__all__ = [
    "CompatibilityGraph",
    "ChordalResult",
    "is_chordal",
    "maximal_cliques",
    "solve_chordal",
    "embed_classical_state",
    "local_unitary_equivalent",
    "marginalize",
]

COMPAT_TOL = 1e-10
ZERO_TOL = 1e-14


@dataclass(frozen=True)
class CompatibilityGraph:
    """Hypergraph of variable subsets; each hyperedge becomes a clique."""

    hyperedges: tuple
    vertices: tuple = None

    def __post_init__(self):
        edges = tuple(tuple(h) for h in self.hyperedges)
        seen = []
        for h in edges:
            if not h or len(set(h)) != len(h):
                raise ValueError(f"hyperedge {h} must be nonempty without repeats")
            seen.extend(v for v in h if v not in seen)
        verts = tuple(seen) if self.vertices is None else tuple(self.vertices)
        if set(verts) != set(seen):
            raise ValueError("every vertex must appear in some hyperedge")
        object.__setattr__(self, "hyperedges", edges)
        object.__setattr__(self, "vertices", verts)

    def adjacency(self):
        adj = {v: set() for v in self.vertices}
        for h in self.hyperedges:
            for a, b in combinations(h, 2):
                adj[a].add(b)
                adj[b].add(a)
        return adj


@dataclass(frozen=True)
class ChordalResult:
    chordal: bool
    ordering: tuple = None  # perfect elimination ordering when chordal

    def __bool__(self):
        return self.chordal


def _mcs(vertices, adj):
    """Maximum-cardinality search; ties go to the earliest vertex."""
    weight = {v: 0 for v in vertices}
    visited = []
    left = list(vertices)
    while left:
        v = max(left, key=lambda u: (weight[u], -vertices.index(u)))
        visited.append(v)
        left.remove(v)
        for u in adj[v]:
            if u in weight and u not in visited:
                weight[u] += 1
    return visited


def _is_peo(order, adj):
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [u for u in adj[v] if pos[u] > pos[v]]
        for a, b in combinations(later, 2):
            if b not in adj[a]:
                return False
    return True


def is_chordal(g):
    """Chordality test by maximum-cardinality search.

    The reverse MCS visit order is a perfect elimination ordering exactly
    when the graph is chordal.
    """
    adj = g.adjacency()
    order = tuple(reversed(_mcs(g.vertices, adj)))
    if _is_peo(order, adj):
        return ChordalResult(True, order)
    return ChordalResult(False, None)


def maximal_cliques(g, ordering=None):
    """Maximal cliques of a chordal graph read off a perfect elimination ordering."""
    adj = g.adjacency()
    if ordering is None:
        res = is_chordal(g)
        if not res:
            raise NotChordalError("graph is not chordal")
        ordering = res.ordering
    pos = {v: i for i, v in enumerate(ordering)}
    cands = [frozenset([v] + [u for u in adj[v] if pos[u] > pos[v]]) for v in ordering]
    cliques = []
    for c in cands:
        if not any(c < d for d in cands) and c not in cliques:
            cliques.append(c)
    return [tuple(v for v in g.vertices if v in c) for c in cliques]


def _diag_basis(k):
    """Rows are the diagonals of the diagonal generalized-Pauli elements (identity first)."""
    if k == 1:
        return np.ones((1, 1))
    ops = make_basis(k).ops
    rows = [np.ones(k)] + [np.real(np.diag(op)) for op in ops[1:] if np.allclose(op, np.diag(np.diag(op)))]
    return np.array(rows)


def _coefficient_completion(clique, card, sources):
    """Distribution on ``clique`` matching each ``(vars, QuasiDistribution)`` in ``sources``.

    Works in a basis of functions where summing out a variable fixes its
    index to 0; coefficients supported inside some source are copied and
    all others set to zero.
    """
    bases = [_diag_basis(card[v]) for v in clique]
    coef = np.zeros([card[v] for v in clique])
    mask = np.zeros(coef.shape, dtype=bool)
    for vars_, q in sources:
        w = q.weights
        for i, v in enumerate(vars_):
            w = np.moveaxis(np.tensordot(w, bases[clique.index(v)], axes=([i], [1])), -1, i)
        pos = [clique.index(v) for v in vars_]
        sl = tuple(slice(None) if i in pos else 0 for i in range(len(clique)))
        sub = np.transpose(w, np.argsort(pos))
        new = ~mask[sl]
        coef[sl][new] = sub[new]
        mask[sl] = True
    # invert: p = sum_mu coef[mu] prod f_mu(a) / k, since rows are orthogonal with norm^2 = k
    p = coef
    for i, v in enumerate(clique):
        p = np.moveaxis(np.tensordot(p, bases[i], axes=([i], [0])), -1, i) / card[v]
    return QuasiDistribution(p / p.sum(), clique)


def _clique_order(cliques):
    """Prim's maximum-weight spanning tree on separator sizes; returns (order, parent)."""
    n = len(cliques)
    sets = [set(c) for c in cliques]
    in_tree = [0]
    parent = {0: None}
    while len(in_tree) < n:
        best = None
        for j in range(n):
            if j in parent:
                continue
            for i in in_tree:
                w = len(sets[i] & sets[j])
                if best is None or w > best[0]:
                    best = (w, i, j)
        _, i, j = best
        parent[j] = i
        in_tree.append(j)
    return in_tree, parent


def solve_chordal(g, parts):
    """Joint quasi-distribution reproducing every hyperedge marginal.

    Parameters
    ----------
    g : CompatibilityGraph
    parts : sequence of QuasiDistribution
        One per hyperedge, in the same order; ``variables`` must list the
        hyperedge's vertices.
    """
    res = is_chordal(g)
    if not res:
        raise NotChordalError("compatibility graph is not chordal")
    parts = list(parts)
    if len(parts) != len(g.hyperedges):
        raise ValueError("one distribution per hyperedge required")
    card = {}
    for h, q in zip(g.hyperedges, parts):
        if set(q.variables) != set(h) or len(q.variables) != len(h):
            raise UnknownEventError(f"part variables {q.variables} do not match hyperedge {h}")
        for v, k in zip(q.variables, q.shape):
            if card.setdefault(v, k) != k:
                raise DimensionMismatchError(f"variable {v!r} has cardinalities {card[v]} and {k}")
    for (i, p), (j, q) in combinations(enumerate(parts), 2):
        shared = [v for v in p.variables if v in q.variables]
        if shared:
            dev = float(np.max(np.abs(marginalize(p, shared).weights - marginalize(q, shared).weights)))
            if dev > COMPAT_TOL:
                raise IncompatibleError(f"hyperedges {i} and {j} disagree by {dev:.3g}", pair=(i, j), deviation=dev)

    cliques = maximal_cliques(g, res.ordering)
    dists = []
    for c in cliques:
        host = next((k for k, h in enumerate(g.hyperedges) if set(c) <= set(h)), None)
        if host is not None:
            dists.append(marginalize(parts[host], c))
        else:
            sources = []
            for h, q in zip(g.hyperedges, parts):
                inter = [v for v in h if v in c]
                if inter:
                    sources.append((inter, marginalize(q, inter)))
            dists.append(_coefficient_completion(c, card, sources))

    order, parent = _clique_order(cliques)
    joint = dists[order[0]].weights
    jvars = list(cliques[order[0]])
    for k in order[1:]:
        c, pc = list(cliques[k]), dists[k]
        sep = [v for v in c if v in jvars]
        new = [v for v in c if v not in jvars]
        pc_w = marginalize(pc, sep + new).weights if sep else marginalize(pc, new).weights
        if sep:
            ps = marginalize(pc, sep).weights
            zero = np.abs(ps) <= ZERO_TOL
            block = pc_w.reshape(ps.shape + (-1,))
            if np.any(np.abs(block[zero]) > 1e-12):
                raise ZeroSeparatorError("separator weight is zero but the clique weights are not")
            safe = np.where(zero, 1.0, ps)
            cond = block / safe[..., None]
            cond[zero] = 1.0 / block.shape[-1]
            cond = cond.reshape(pc_w.shape)
        else:
            cond = pc_w
        # align joint axes (jvars) with cond axes (sep + new)
        jidx = "".join(chr(97 + i) for i in range(len(jvars)))
        cidx = "".join(jidx[jvars.index(v)] for v in sep) + "".join(chr(97 + len(jvars) + i) for i in range(len(new)))
        out = jidx + cidx[len(sep):]
        joint = np.einsum(f"{jidx},{cidx}->{out}", joint, cond)
        jvars += new
    perm = [jvars.index(v) for v in g.vertices]
    joint = np.transpose(joint, perm)
    return QuasiDistribution(joint / joint.sum(), g.vertices)


def _projector_rows(proj, d=None):
    """Normalize a projector set to rows of unit vectors and check it."""
    arr = np.asarray(proj, dtype=np.complex128)
    if arr.ndim == 3:  # stack of rank-1 projectors
        vecs = []
        for pr in arr:
            vals, v = np.linalg.eigh(pr)
            vecs.append(v[:, -1] * np.sqrt(max(vals[-1], 0.0)))
        arr = np.array(vecs)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or (d is not None and arr.shape[0] != d):
        raise IncompleteBasisError(f"need {d} rank-1 projectors on a {d}-level event")
    if np.max(np.abs(arr.conj() @ arr.T - np.eye(arr.shape[0]))) > 1e-10:
        raise IncompleteBasisError("projectors are not a complete orthonormal set")
    return arr


def embed_classical_state(q, local_projectors):
    """Classical space-time state ``W = sum_a p(a) (x)_i Pi_{a_i}`` as a PDO.

    ``local_projectors[i]`` is either a ``(d, d)`` array whose rows are the
    basis vectors or a stack of ``d`` rank-1 projectors.
    """
    if len(local_projectors) != len(q.shape):
        raise DimensionMismatchError("one projector set per variable required")
    t = q.weights
    dims = []
    for i, (proj, k) in enumerate(zip(local_projectors, q.shape)):
        rows = _projector_rows(proj, k)
        bloch = np.stack([P.matrix_to_tensor(np.outer(v, v.conj()), (k,)) for v in rows])
        t = np.moveaxis(np.tensordot(t, bloch, axes=([i], [0])), -1, i)
        dims.append(k)
    t[(0,) * len(dims)] = 1.0
    return P.Pdo(tuple(dims), t, q.variables)


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    residual: float
    unitaries: tuple = ()
    reason: str = ""

    def __bool__(self):
        return self.equivalent


def _local_spectra(p):
    return [np.linalg.eigvalsh(P.partial_trace(p, [e]).matrix) for e in p.labels]


def local_unitary_equivalent(w1, w2, seed=0, restarts=8, maxiter=400, tol=1e-6):
    """Heuristic search for local unitaries with ``(x)U W1 (x)U^dag = W2``.

    Spectra are compared first; then ``restarts`` seeded BFGS runs minimize
    the Frobenius residual over ``U_i = expm(i H_i)``. A false result only
    means no unitary was found within the budget.
    """
    if w1.dims != w2.dims:
        raise DimensionMismatchError("PDOs must share dims")
    if np.max(np.abs(w1.eigenvalues - w2.eigenvalues)) > 1e-8:
        return EquivalenceResult(False, np.inf, (), "global spectra differ")
    for a, b in zip(_local_spectra(w1), _local_spectra(w2)):
        if np.max(np.abs(a - b)) > 1e-8:
            return EquivalenceResult(False, np.inf, (), "local spectra differ")
    m1, m2 = w1.matrix, w2.matrix
    bases = [make_basis(d).ops[1:] for d in w1.dims]
    sizes = [len(b) for b in bases]

    def unitaries(theta):
        out, k = [], 0
        for b, s in zip(bases, sizes):
            out.append(expm(1j * np.tensordot(theta[k : k + s], b, axes=1)))
            k += s
        return out

    def cost(theta):
        u = unitaries(theta)[0]
        for v in unitaries(theta)[1:]:
            u = np.kron(u, v)
        return float(np.sum(np.abs(u @ m1 @ u.conj().T - m2) ** 2))

    rng = np.random.default_rng(seed)
    best = (np.inf, None)
    for r in range(restarts):
        x0 = np.zeros(sum(sizes)) if r == 0 else rng.uniform(-np.pi, np.pi, sum(sizes))
        res = minimize(cost, x0, method="BFGS", options={"maxiter": maxiter, "gtol": 1e-12})
        resid = np.sqrt(max(res.fun, 0.0))
        if resid < best[0]:
            best = (resid, res.x)
        if resid < tol:
            return EquivalenceResult(True, float(resid), tuple(unitaries(res.x)), "found")
    return EquivalenceResult(False, float(best[0]), tuple(unitaries(best[1])), "not found")


def to_json(q):
    from .quasi import to_json as _to

    return _to(q)
