"""Maximum-entropy inference of a global PDO from its marginals.

Direct mode ascends the entropy over the free entries of the marginal
solution family, so every iterate reproduces the marginals exactly. The
network mode parameterizes the whole tensor with a small tanh network and
enforces the marginals with an augmented Lagrangian.
"""

from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from . import pdo as P
from .entropy import spectral_entropy
from .errors import NotFoundError, NumericalError
from .marginal import MarginalScenario, SearchOptions, filter_positive, solve_herm1

LN2 = np.log(2.0)


@dataclass(frozen=True)
class MlpOptions:
    hidden: int = 16
    outer: int = 30
    inner: int = 1000
    penalty: float = 0.1
    growth: float = 3.0
    target: float = 1e-7


@dataclass(frozen=True, eq=False)
class MaxEntProblem:
    """Inputs of a maximum-entropy inference.

    Parameters
    ----------
    scenario : MarginalScenario
    seed : int
    iterations, restarts : int
        Ascent budget per restart and number of restarts.
    box : float, optional
        Bound on every tensor entry; defaults to ``prod(sqrt(d))``.
    parameterization : {"direct", "mlp"}
    domain : {"herm1", "positive"}
        ``"positive"`` keeps every iterate positive semidefinite.
    """

    scenario: MarginalScenario
    seed: int = 0
    iterations: int = 300
    restarts: int = 4
    box: float = None
    parameterization: str = "direct"
    domain: str = "herm1"
    fd_step: float = 1e-5
    mlp: MlpOptions = field(default_factory=MlpOptions)

    def __post_init__(self):
        if self.parameterization not in ("direct", "mlp"):
            raise ValueError(f"unknown parameterization {self.parameterization!r}")
        if self.domain not in ("herm1", "positive"):
            raise ValueError(f"unknown domain {self.domain!r}")
        box = P.tensor_bound(self.scenario.dims) if self.box is None else float(self.box)
        if box <= 0:
            raise ValueError("box must be positive")
        object.__setattr__(self, "box", box)

    @property
    def family(self):
        return solve_herm1(self.scenario)


@dataclass
class MaxEntResult:
    pdo: P.Pdo
    entropy: float
    trace: list
    iterations: int
    residual: float
    restart: int = 0
    on_bound: bool = False

    def to_dict(self):
        return {
            "entropy": self.entropy,
            "iterations": self.iterations,
            "residual": self.residual,
            "restart": self.restart,
            "on_bound": self.on_bound,
            "pdo": P.to_json(self.pdo),
        }


def _entropies(mats):
    vals = np.linalg.eigvalsh(mats)
    a = np.abs(vals)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(a > 0, a * np.log2(a), 0.0)
    return -terms.sum(axis=-1)


class _Objective:
    def __init__(self, family, h):
        self.base = family.base_point.matrix
        self.mats = family.free_matrices()
        self.h = h

    def matrix(self, x):
        return self.base + np.tensordot(x, self.mats, axes=1) if len(x) else self.base

    def value(self, x):
        return spectral_entropy(np.linalg.eigvalsh(self.matrix(x)))

    def gradient(self, x):
        r = self.matrix(x)
        plus = _entropies(r + self.h * self.mats)
        minus = _entropies(r - self.h * self.mats)
        return (plus - minus) / (2 * self.h)

    def min_eig(self, x):
        return float(np.linalg.eigvalsh(self.matrix(x))[0])


def _ascend(obj, x, box, iterations, positive):
    """Projected gradient ascent with Armijo backtracking; returns (x, S, trace)."""
    s = obj.value(x)
    trace = [s]
    t = 1.0
    for _ in range(iterations):
        g = obj.gradient(x)
        if not np.all(np.isfinite(g)) or np.linalg.norm(g) < 1e-12:
            break
        accepted = False
        while t > 1e-14:
            x_new = np.clip(x + t * g, -box, box)
            step = x_new - x
            if not np.any(step):
                break
            if positive and obj.min_eig(x_new) < -1e-12:
                t /= 2
                continue
            s_new = obj.value(x_new)
            if s_new >= s + 1e-4 * float(g @ step):
                accepted = True
                break
            t /= 2
        if not accepted:
            break
        gain = s_new - s
        x, s = x_new, s_new
        trace.append(s)
        t = min(2 * t, 1e3)
        if gain < 1e-14:
            break
    return x, s, trace


def _product_start(scenario, family):
    """Free entries of the product of the parts when they are disjoint and positive."""
    seen = set()
    for part in scenario.parts:
        if seen & set(part.labels) or not P.is_positive(part, 1e-12):
            return None
        seen |= set(part.labels)
    glob = scenario.parts[0]
    for part in scenario.parts[1:]:
        glob = P.tensor_product(glob, part)
    glob = P.permute(glob, scenario.events)
    return np.asarray(glob.tensor)[~family.mask].copy()


def _positive_start(scenario, family, seed):
    x = _product_start(scenario, family)
    if x is not None:
        return x
    res = filter_positive(family, SearchOptions(seed=seed, tol=1e-12))
    if not res.found:
        raise NotFoundError("no positive completion found to start the ascent from")
    mask = ~family.mask
    return np.asarray(res.pdo.tensor)[mask].copy()


def infer(problem):
    """Direct-mode inference: entropy ascent over the free entries.

    Restart 0 starts at the base point (or at a positive completion in the
    positive domain); the others start at seeded random points in half the
    box. The best entropy wins, ties going to the lowest restart index.
    """
    if problem.parameterization == "mlp":
        return infer_mlp(problem)
    fam = problem.family
    rng = np.random.default_rng(problem.seed)
    box = problem.box
    if fam.n_free == 0:
        p = fam.base_point
        s = spectral_entropy(p.eigenvalues)
        return MaxEntResult(p, s, [s], 0, 0.0)
    obj = _Objective(fam, problem.fd_step)
    positive = problem.domain == "positive"
    x_feas = _positive_start(problem.scenario, fam, problem.seed) if positive else np.zeros(fam.n_free)
    best = None
    for r in range(problem.restarts):
        x0 = x_feas.copy()
        if r > 0:
            target = rng.uniform(-box / 2, box / 2, fam.n_free)
            x0 = target
            if positive:
                lam = 1.0
                while obj.min_eig(x_feas + lam * (target - x_feas)) < -1e-12 and lam > 1e-9:
                    lam /= 2
                x0 = x_feas + lam * (target - x_feas) if lam > 1e-9 else x_feas.copy()
        x, s, trace = _ascend(obj, x0, box, problem.iterations, positive)
        if best is None or s > best[1]:
            best = (x, s, trace, r)
    x, s, trace, r = best
    p = fam.complete(x)
    on_bound = bool(np.any(np.abs(x) >= box - 1e-12))
    return MaxEntResult(p, s, trace, len(trace) - 1, _residual(p, problem.scenario), r, on_bound)


def _residual(p, scenario):
    dev = 0.0
    for part in scenario.parts:
        dev = max(dev, float(np.max(np.abs(P.partial_trace(p, part.labels).tensor - part.tensor))))
    return dev


# network parameterization -------------------------------------------------------


class _Mlp:
    """``y(mu) = w2 . tanh(W1 onehot(mu) + b1) + b2`` over every index tuple."""

    def __init__(self, dims, hidden):
        self.shape = tuple(d * d for d in dims)
        idx = np.indices(self.shape).reshape(len(dims), -1).T
        offsets = np.concatenate([[0], np.cumsum(self.shape)[:-1]])
        self.x = np.zeros((len(idx), sum(self.shape)))
        for k in range(len(dims)):
            self.x[np.arange(len(idx)), offsets[k] + idx[:, k]] = 1.0
        self.n_in = self.x.shape[1]
        self.hidden = hidden
        self.sizes = [hidden * self.n_in, hidden, hidden, 1]

    def unpack(self, theta):
        out, k = [], 0
        for s in self.sizes:
            out.append(theta[k : k + s])
            k += s
        w1, b1, w2, b2 = out
        return w1.reshape(self.hidden, self.n_in), b1, w2, b2[0]

    def init(self, rng):
        scale = 1.0 / np.sqrt(self.n_in)
        w1 = rng.normal(scale=scale, size=(self.hidden, self.n_in))
        b1 = rng.normal(scale=0.1, size=self.hidden)
        w2 = rng.normal(scale=1.0 / np.sqrt(self.hidden), size=self.hidden)
        return np.concatenate([w1.ravel(), b1, w2, [1.0]])

    def forward(self, theta):
        w1, b1, w2, b2 = self.unpack(theta)
        h = np.tanh(self.x @ w1.T + b1)
        return h @ w2 + b2, h

    def backward(self, theta, h, gy):
        w1, b1, w2, b2 = self.unpack(theta)
        g_w2 = h.T @ gy
        g_b2 = gy.sum()
        gz = np.outer(gy, w2) * (1 - h**2)
        g_w1 = gz.T @ self.x
        g_b1 = gz.sum(axis=0)
        return np.concatenate([g_w1.ravel(), g_b1, g_w2, [g_b2]])


def _entropy_and_grad(t, dims):
    """Entropy of a tensor and its analytic derivative with respect to every entry."""
    m = P.tensor_to_matrix(t, dims)
    vals, vecs = np.linalg.eigh(m)
    a = np.abs(vals)
    safe = np.where(a > 1e-300, a, 1e-300)
    s = float(-np.sum(np.where(a > 0, a * np.log2(safe), 0.0)))
    ds = -np.sign(vals) * (np.log2(safe) + 1.0 / LN2)
    g = (vecs * ds) @ vecs.conj().T
    # dS/dT[mu] = trace(G B_mu) with B_mu = (x)s_mu / D
    grad = P.matrix_to_tensor(g, dims) / np.prod(dims)
    return s, grad


def infer_mlp(problem):
    """Network-mode inference with an augmented Lagrangian on the marginals.

    ``T(mu) = box * tanh(y(mu) / (y(0) * box))`` for ``mu != 0`` and
    ``T(0) = 1``. Each outer round minimizes
    ``-S + lam . r + (rho / 2) |r|^2`` with L-BFGS, where ``r`` are the
    deviations of the marginal-fixed entries; the multipliers are then
    updated and ``rho`` grows while the residual stalls.
    """
    scen = problem.scenario
    if any(d != 2 for d in scen.dims):
        raise ValueError("network parameterization is implemented for qubit events")
    fam = problem.family
    opts = problem.mlp
    box = problem.box
    net = _Mlp(scen.dims, opts.hidden)
    mask = fam.mask.ravel().copy()
    mask[0] = False
    target = fam.fixed.ravel()[mask]
    rng = np.random.default_rng(problem.seed)
    trace = []
    best = None

    for restart in range(problem.restarts):
        theta = net.init(rng)
        if abs(net.forward(theta)[0][0]) < 1e-9:
            continue
        lam = np.zeros(mask.sum())
        rho = opts.penalty
        last_res = np.inf

        def tensor_of(theta):
            y, h = net.forward(theta)
            y0 = y[0]
            if abs(y0) < 1e-9:
                raise NumericalError("degenerate normalization")
            u = y / y0
            t = box * np.tanh(u / box)
            t[0] = 1.0
            return t, u, y, y0, h

        def fun(theta):
            t, u, y, y0, h = tensor_of(theta)
            s, gs = _entropy_and_grad(t.reshape(net.shape), scen.dims)
            r = t[mask] - target
            val = -s + lam @ r + 0.5 * rho * r @ r
            gt = -gs.ravel()
            gt[mask] += lam + rho * r
            gu = gt * (1 - np.tanh(u / box) ** 2)
            gu[0] = 0.0
            gy = gu / y0
            gy[0] = -np.sum(gu * y) / y0**2
            return val, net.backward(theta, h, gy)

        ok = True
        for _ in range(opts.outer):
            try:
                res = minimize(
                    fun,
                    theta,
                    jac=True,
                    method="L-BFGS-B",
                    options={"maxiter": opts.inner, "ftol": 1e-15, "gtol": 1e-10},
                    callback=lambda th: trace.append(float(fun(th)[0])),
                )
            except NumericalError:
                ok = False
                break
            theta = res.x
            t = tensor_of(theta)[0]
            r = t[mask] - target
            lam = lam + rho * r
            cur = float(np.max(np.abs(r), initial=0.0))
            if cur > 0.25 * last_res:
                rho *= opts.growth
            last_res = cur
            if cur < opts.target:
                break
        if not ok:
            continue
        p = P.Pdo(scen.dims, t.reshape(net.shape), scen.events)
        s = spectral_entropy(p.eigenvalues)
        resid = _residual(p, scen)
        key = (resid < 1e-6, s)
        if best is None or key > best[0]:
            best = (key, MaxEntResult(p, s, list(trace), len(trace), resid, restart))
    if best is None:
        raise NumericalError("network normalization degenerate on every restart")
    return best[1]


# derived quantities ---------------------------------------------------------------


def _distance(a, b, norm):
    diff = a.matrix - b.matrix
    if norm == "trace":
        return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    if norm == "frobenius":
        return float(np.linalg.norm(diff))
    raise ValueError(f"unknown norm {norm!r}")


def k_marginal_scenario(p, k):
    if not 1 <= k < p.n:
        raise ValueError(f"order k must satisfy 1 <= k < {p.n}")
    parts = [P.partial_trace(p, list(c)) for c in combinations(p.labels, k)]
    return MarginalScenario(tuple(parts), p.labels)


@dataclass
class GenuineCorrelation:
    value: float
    inference: MaxEntResult
    norm: str
    unique: bool = None  # None unless the witness search was run

    def __float__(self):
        return self.value


def genuine_correlation(p, k, norm="trace", check_unique=False, **problem_kw):
    """Distance between ``p`` and the max-entropy state with the same k-event marginals.

    The value refers to the returned maximizer. With ``check_unique`` the
    seeded witness search also runs and ``unique`` records whether it
    failed to find a second maximizer.
    """
    scen = k_marginal_scenario(p, k)
    problem = MaxEntProblem(scen, **problem_kw)
    res = infer(problem)
    unique = None
    if check_unique:
        kw = {key: v for key, v in problem_kw.items() if key != "seed"}
        unique = non_uniqueness_witness(scen, norm=norm, **kw) is None
    return GenuineCorrelation(max(0.0, _distance(p, res.pdo, norm)), res, norm, unique)


def non_uniqueness_witness(scenario, seeds=range(6), norm="trace", entropy_gap=1e-6, distance=1e-4, **problem_kw):
    """Two inferred states with (nearly) equal entropy but different operators, or ``None``."""
    results = []
    for seed in seeds:
        problem = MaxEntProblem(scenario, seed=seed, **problem_kw)
        results.append(infer(problem))
    top = max(r.entropy for r in results)
    for a, b in combinations(results, 2):
        if abs(a.entropy - b.entropy) < entropy_gap and abs(a.entropy - top) < entropy_gap:
            if _distance(a.pdo, b.pdo, norm) > distance:
                return a, b
    return None


def with_seed(problem, seed):
    return replace(problem, seed=seed)
