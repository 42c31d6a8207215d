"""Marginal problems for PDOs.

In the correlation-tensor picture a reduced PDO on a subset of events is
the sub-tensor whose indices outside the subset are 0. A global tensor
therefore reproduces a family of compatible marginals exactly when every
entry supported inside some part is copied from that part; every other
entry is free. :func:`solve_herm1` returns this affine family and the
filters below search it for completions with extra properties.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import pdo as P
from . import simplex
from .errors import DimensionMismatchError, IncompatibleError, NotHermitianError, SupportError, UnknownEventError
from .pdo import Pdo

COMPAT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MarginalScenario:
    """Compatible reduced PDOs over subsets of a global event set.

    Parts whose events are contained in another part are dropped after
    the compatibility check; the remaining parts are kept in input order.

    Parameters
    ----------
    parts : sequence of Pdo
        Each part's ``labels`` name its events.
    events : sequence, optional
        Global event order; defaults to the order of first appearance.
    """

    parts: tuple
    events: tuple = None
    dims: tuple = field(default=None, init=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("scenario needs at least one part")
        dims = {}
        order = []
        for p in parts:
            for lab, d in zip(p.labels, p.dims):
                if lab in dims:
                    if dims[lab] != d:
                        raise DimensionMismatchError(f"event {lab!r} has dimensions {dims[lab]} and {d}")
                else:
                    dims[lab] = d
                    order.append(lab)
        events = tuple(order) if self.events is None else tuple(self.events)
        if set(events) != set(order) or len(events) != len(order):
            raise UnknownEventError(f"events {events} differ from the union of part events {tuple(order)}")
        for (i, p), (j, q) in combinations(enumerate(parts), 2):
            dev = P.compatibility_deviation(p, q)
            if dev > COMPAT_TOL:
                raise IncompatibleError(
                    f"parts {i} and {j} disagree on their overlap by {dev:.3g}", pair=(i, j), deviation=dev
                )
        kept = []
        for i, p in enumerate(parts):
            s = set(p.labels)
            dominated = any(
                (s < set(q.labels)) or (s == set(q.labels) and j < i) for j, q in enumerate(parts) if j != i
            )
            if not dominated:
                kept.append(p)
        object.__setattr__(self, "parts", tuple(kept))
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "dims", tuple(dims[e] for e in events))

    @property
    def n(self):
        return len(self.events)

    def positions(self, part):
        return [self.events.index(lab) for lab in part.labels]


@dataclass(frozen=True, eq=False)
class SolutionFamily:
    """Affine family of global tensors reproducing a scenario's marginals.

    Attributes
    ----------
    dims, labels : tuple
        Global events.
    fixed : ndarray
        Tensor holding the values forced by the parts (0 elsewhere).
    mask : ndarray of bool
        True on fixed entries.
    source : ndarray of int
        Index of the part that supplied each fixed entry, -1 on free ones.
    """

    dims: tuple
    labels: tuple
    fixed: np.ndarray
    mask: np.ndarray
    source: np.ndarray

    @property
    def free_index_set(self):
        return [tuple(int(v) for v in idx) for idx in np.argwhere(~self.mask)]

    @property
    def n_free(self):
        return int(np.count_nonzero(~self.mask))

    @property
    def base_point(self):
        return Pdo(self.dims, self.fixed, self.labels)

    def complete_tensor(self, values):
        t = np.array(self.fixed)
        t[~self.mask] = np.asarray(values, dtype=float)
        return t

    def complete(self, values):
        """Completion with the free entries (in :attr:`free_index_set` order) set to ``values``."""
        return Pdo(self.dims, self.complete_tensor(values), self.labels)

    def free_matrices(self):
        """Operator of each unit free entry, stacked as ``(n_free, D, D)``."""
        idx = np.argwhere(~self.mask)
        out = np.empty((len(idx), *(2 * (int(np.prod(self.dims)),))), dtype=np.complex128)
        unit = np.zeros(self.fixed.shape)
        for k, i in enumerate(idx):
            unit[tuple(i)] = 1.0
            out[k] = P.tensor_to_matrix(unit, self.dims)
            unit[tuple(i)] = 0.0
        return out


def solve_herm1(s):
    """Affine family of all Hermitian trace-one solutions of ``s``.

    An entry is fixed when its support (set of nonzero indices) lies inside
    some part; the first such part supplies the value. Free entries are 0
    in the base point.
    """
    shape = tuple(d * d for d in s.dims)
    fixed = np.zeros(shape)
    mask = np.zeros(shape, dtype=bool)
    source = np.full(shape, -1, dtype=int)
    for k, part in enumerate(s.parts):
        pos = s.positions(part)
        order = np.argsort(pos)
        sub = np.transpose(part.tensor, order)
        sl = tuple(slice(None) if i in pos else 0 for i in range(s.n))
        new = ~mask[sl]
        fixed[sl][new] = sub[new]
        source[sl][new] = k
        mask[sl] = True
    fixed[(0,) * s.n] = 1.0
    return SolutionFamily(s.dims, s.events, fixed, mask, source)


def reduce_check(f, s):
    """Largest entrywise deviation between the reductions of ``f`` and the parts.

    ``f`` is a :class:`SolutionFamily` (its base point is checked) or a :class:`Pdo`.
    """
    glob = f.base_point if isinstance(f, SolutionFamily) else f
    dev = 0.0
    for part in s.parts:
        red = P.partial_trace(glob, part.labels)
        dev = max(dev, float(np.max(np.abs(red.tensor - part.tensor))))
    return dev


# positivity filter -----------------------------------------------------------


@dataclass(frozen=True)
class SearchOptions:
    starts: int = 64
    iterations: int = 500
    seed: int = 0
    tol: float = 1e-10
    step: float = 0.5
    threads: int = None


@dataclass(frozen=True)
class SearchResult:
    pdo: Pdo = None
    min_eigenvalue: float = -np.inf
    start: int = -1
    evaluations: int = 0

    @property
    def found(self):
        return self.pdo is not None


def _threads(opts):
    if opts.threads:
        return max(1, int(opts.threads))
    env = os.environ.get("PDOLAB_THREADS")
    return max(1, int(env)) if env else min(8, os.cpu_count() or 1)


def _ascend(base, mats, box, x0, opts):
    """Projected supergradient ascent on the smallest eigenvalue."""
    x = x0.copy()
    best = -np.inf
    best_x = x
    for k in range(opts.iterations):
        r = base + np.tensordot(x, mats, axes=1)
        vals, vecs = np.linalg.eigh(r)
        lam = vals[0]
        if lam > best:
            best, best_x = lam, x.copy()
        if lam >= -opts.tol:
            return lam, x, k + 1
        v = vecs[:, 0]
        g = np.real(np.einsum("i,kij,j->k", v.conj(), mats, v))
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        x = np.clip(x + opts.step * box / np.sqrt(k + 1.0) * g / gn, -box, box)
    return best, best_x, opts.iterations


def filter_positive(f, opts=None, **kw):
    """Search the family for a positive semidefinite completion.

    Multi-start projected ascent on the smallest eigenvalue. Start 0 is the
    base point, the others are uniform in half the entry box. The hit with
    the lowest start index is returned; a miss means the budget ran out,
    not that no positive completion exists.
    """
    opts = opts or SearchOptions(**kw)
    base = f.base_point.matrix
    if np.linalg.eigvalsh(base)[0] >= -opts.tol:
        return SearchResult(f.base_point, float(np.linalg.eigvalsh(base)[0]), 0, 1)
    if f.n_free == 0:
        return SearchResult(None, float(np.linalg.eigvalsh(base)[0]), -1, 1)
    mats = f.free_matrices()
    box = P.tensor_bound(f.dims)
    rng = np.random.default_rng(opts.seed)
    x0s = [np.zeros(f.n_free)] + [rng.uniform(-box / 2, box / 2, f.n_free) for _ in range(opts.starts - 1)]
    workers = _threads(opts)
    best = SearchResult()
    evals = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for lo in range(0, opts.starts, workers):
            batch = list(range(lo, min(lo + workers, opts.starts)))
            results = list(pool.map(lambda i: _ascend(base, mats, box, x0s[i], opts), batch))
            for i, (lam, x, used) in zip(batch, results):
                evals += used
                if lam >= -opts.tol:
                    return SearchResult(f.complete(x), float(lam), i, evals)
                if lam > best.min_eigenvalue:
                    best = SearchResult(None, float(lam), i, 0)
    return SearchResult(None, best.min_eigenvalue, best.start, evals)


# polytope filters ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """``{R : trace(R K) >= offset}`` for a Hermitian ``K``."""

    operator: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        k = np.array(self.operator, dtype=np.complex128)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise DimensionMismatchError("half-space operator must be square")
        if np.max(np.abs(k - k.conj().T)) > 1e-12:
            raise NotHermitianError("half-space operator must be Hermitian")
        k.flags.writeable = False
        object.__setattr__(self, "operator", k)
        object.__setattr__(self, "offset", float(self.offset))

    def value(self, p):
        if self.operator.shape != (p.size, p.size):
            raise DimensionMismatchError(f"operator of side {self.operator.shape[0]} vs PDO of side {p.size}")
        return float(np.real(np.trace(p.matrix @ self.operator)))


def in_halfspaces(p, hs, tol=1e-10):
    return all(h.value(p) >= h.offset - tol for h in hs)


def in_hull(p, vertices, tol=simplex.FEAS_TOL):
    """Convex-hull membership by a linear feasibility problem over tensor entries."""
    if not vertices:
        return False
    if any(v.dims != p.dims for v in vertices):
        raise DimensionMismatchError("vertices and point must share dims")
    a = np.stack([v.tensor.ravel() for v in vertices], axis=1)
    a = np.vstack([a, np.ones(len(vertices))])
    b = np.append(p.tensor.ravel(), 1.0)
    return simplex.solve(np.zeros(len(vertices)), a, b, tol).status != "infeasible"


def filter_halfspaces(f, hs, tol=simplex.FEAS_TOL):
    """Completion of ``f`` inside every half-space and the entry box, by linear programming.

    With ``y = x + box`` the conditions ``trace(R(x) K) >= offset`` and
    ``|x| <= box`` become a standard-form feasibility problem.
    """
    if f.n_free == 0:
        p = f.base_point
        return SearchResult(p if in_halfspaces(p, hs) else None, 0.0, 0 if in_halfspaces(p, hs) else -1, 1)
    box = P.tensor_bound(f.dims)
    mats = f.free_matrices()
    base = f.base_point.matrix
    n, m = f.n_free, len(hs)
    a = np.zeros((m + n, 2 * n + m))
    b = np.zeros(m + n)
    for k, h in enumerate(hs):
        if h.operator.shape != base.shape:
            raise DimensionMismatchError("half-space operator does not match the family's events")
        row = np.real(np.einsum("kij,ji->k", mats, h.operator))
        a[k, :n] = row
        a[k, 2 * n + k] = -1.0
        b[k] = h.offset - np.real(np.trace(base @ h.operator)) + row.sum() * box
    a[m:, :n] = np.eye(n)
    a[m:, n : 2 * n] = np.eye(n)
    b[m:] = 2 * box
    res = simplex.solve(np.zeros(2 * n + m), a, b, tol)
    if res.status == "infeasible":
        return SearchResult(None, -res.infeasibility, -1, res.iterations)
    return SearchResult(f.complete(res.x[:n] - box), 0.0, 0, res.iterations)


def filter_hull(f, vertices, tol=simplex.FEAS_TOL):
    """Completion of ``f`` that is a convex combination of ``vertices``.

    Only the fixed entries constrain the weights; the free entries of the
    completion are then read off the mixture.
    """
    if any(v.dims != f.dims for v in vertices):
        raise DimensionMismatchError("vertices must share the family's dims")
    if not vertices:
        return SearchResult()
    vs = [P.permute(v, f.labels) if set(v.labels) == set(f.labels) else v for v in vertices]
    a = np.stack([v.tensor[f.mask] for v in vs], axis=1)
    a = np.vstack([a, np.ones(len(vs))])
    b = np.append(f.fixed[f.mask], 1.0)
    res = simplex.solve(np.zeros(len(vs)), a, b, tol)
    if res.status == "infeasible":
        return SearchResult(None, -res.infeasibility, -1, res.iterations)
    t = np.tensordot(res.x, np.stack([v.tensor for v in vs]), axes=1)
    t[f.mask] = f.fixed[f.mask]
    return SearchResult(P.Pdo(f.dims, t, f.labels), 0.0, 0, res.iterations)


# extensions --------------------------------------------------------------------


def _bloch_rows(states):
    """Correlation vectors of the projectors onto each row of ``states``."""
    d = states.shape[1]
    return np.stack([P.matrix_to_tensor(np.outer(v, v.conj()), (d,)) for v in states])


def symmetric_extension(w, n, labels=None):
    """Extension of a two-event PDO to one ``A`` and ``n - 1`` copies of ``B``.

    With ``w = sum p(a, b) |a><a| (x) |b><b|`` from the separable expansion,
    returns ``sum p(a, b) |a><a| (x) (|b><b|)^(x)(n-1)``; every ``(A, B_i)``
    reduction equals ``w``. The result is generally not positive.
    """
    if w.n != 2:
        raise ValueError("symmetric extension needs a two-event PDO")
    if n < 2:
        raise ValueError("n counts all events and must be at least 2")
    exp = P.separable_expansion(w)
    ta = _bloch_rows(exp.local_states[0])
    tb = _bloch_rows(exp.local_states[1])
    copies = tb
    for _ in range(n - 2):
        copies = np.einsum("s...,sk->s...k", copies, tb)
    t = np.tensordot(np.tensordot(exp.weights.weights, ta, axes=([0], [0])), copies, axes=([0], [0]))
    t[(0,) * n] = 1.0
    if labels is None:
        a, b = w.labels
        labels = (a,) + tuple(f"{b}#{k}" for k in range(1, n))
    return Pdo((w.dims[0],) + (w.dims[1],) * (n - 1), t, labels)


def polygamy_extension(n, xi=None, labels=None):
    """Qubit operator ``(I - sum_i Omega_i + Xi) / 2**(n+1)`` on ``A, B_1 .. B_n``.

    ``Omega_i = X_A X_Bi + Y_A Y_Bi + Z_A Z_Bi``, so every ``(A, B_i)``
    reduction is the singlet. ``xi`` is a correlation tensor of shape
    ``(4,) * (n+1)`` that may only touch entries with at least two nonzero
    ``B`` indices; anything else would change the marginals.
    """
    if n < 1:
        raise ValueError("need at least one copy")
    shape = (4,) * (n + 1)
    t = np.zeros(shape)
    t[(0,) * (n + 1)] = 1.0
    for i in range(1, n + 1):
        for mu in (1, 2, 3):
            idx = [0] * (n + 1)
            idx[0] = idx[i] = mu
            t[tuple(idx)] = -1.0
    if xi is not None:
        xi = np.asarray(xi, dtype=float)
        if xi.shape != shape:
            raise DimensionMismatchError(f"free tensor must have shape {shape}")
        nz_b = np.count_nonzero(np.indices(shape)[1:], axis=0)
        bad = (nz_b < 2) & (xi != 0)
        if np.any(bad):
            raise SupportError(f"free tensor touches constrained entries, e.g. {tuple(np.argwhere(bad)[0])}")
        t = t + xi
    labels = ("A",) + tuple(f"B{i}" for i in range(1, n + 1)) if labels is None else labels
    return Pdo((2,) * (n + 1), t, labels)


# symmetry ------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryReport:
    symmetric: bool
    global_fixed: bool
    global_residual: float
    part_residuals: tuple
    message: str

    def __bool__(self):
        return self.symmetric


def check_symmetry(s, glob, group_channels, tol=1e-9):
    """Check that a symmetry of the global PDO is inherited by the parts.

    Each group channel must map the global events to themselves. When some
    channel moves ``glob`` the report says "global not symmetric" and is
    false; otherwise each part is tested against the marginal of every
    channel on that part's events.
    """
    from .channel import apply, marginal_channel
    from .errors import NoMarginalChannelError

    glob = P.permute(glob, s.events) if set(glob.labels) == set(s.events) else glob
    gres = 0.0
    for g in group_channels:
        if tuple(g.in_dims) != glob.dims or tuple(g.out_dims) != glob.dims:
            raise DimensionMismatchError("group channels must map the global events to themselves")
        gres = max(gres, float(np.max(np.abs(apply(g, glob).tensor - glob.tensor))))
    if gres > tol:
        return SymmetryReport(False, False, gres, (), "global not symmetric")
    residuals = []
    for part in s.parts:
        pos = s.positions(part)
        worst = 0.0
        for g in group_channels:
            try:
                m = marginal_channel(g, pos, pos)
            except NoMarginalChannelError:
                worst = np.inf
                break
            worst = max(worst, float(np.max(np.abs(apply(m, part).tensor - part.tensor))))
        residuals.append(worst)
    ok = all(r <= tol for r in residuals)
    return SymmetryReport(ok, True, gres, tuple(residuals), "parts symmetric" if ok else "part not symmetric")


# json ------------------------------------------------------------------------------


def scenario_to_json(s):
    return {
        "version": 1,
        "events": list(s.events),
        "parts": [{"events": list(p.labels), "pdo": P.to_json(p)} for p in s.parts],
    }


def scenario_from_json(obj):
    if obj.get("version", 1) != 1:
        raise ValueError(f"unsupported scenario version {obj.get('version')}")
    parts = []
    for item in obj["parts"]:
        p = P.from_json(item["pdo"])
        parts.append(p.relabel(item.get("events", p.labels)))
    return MarginalScenario(tuple(parts), obj.get("events"))


def family_to_json(f):
    return {
        "version": 1,
        "events": list(f.labels),
        "dims": list(f.dims),
        "base_point": P.to_json(f.base_point),
        "n_free": f.n_free,
        "free_indices": [list(i) for i in f.free_index_set],
    }
