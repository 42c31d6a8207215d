import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pdolab import kernels
from pdolab.quasi import QuasiDistribution

# the backend fixture is a context that stays fixed across generated inputs
settings.register_profile(
    "pdolab", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("pdolab")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
PAULIS = [np.eye(2, dtype=complex), X, Y, Z]


@pytest.fixture(params=kernels.available())
def backend(request):
    with kernels.using(request.param):
        yield request.param


def naive_matrix(tensor, dims):
    """Dense operator by explicit Kronecker sums (reference for the fast path)."""
    from pdolab.basis import make_basis

    out = 0
    for idx in np.ndindex(*tensor.shape):
        if tensor[idx] == 0:
            continue
        term = np.ones((1, 1))
        for mu, d in zip(idx, dims):
            term = np.kron(term, make_basis(d).ops[mu])
        out = out + tensor[idx] * term
    return out / np.prod(dims)


def dense_partial_trace(m, dims, keep):
    """Partial trace of a dense matrix onto the subsystems in ``keep`` (sorted)."""
    n = len(dims)
    t = m.reshape(list(dims) * 2)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    side = int(np.prod([dims[i] for i in keep]))
    return r.reshape(side, side)


def random_chordal_hyperedges(rng, n_vars):
    """Grow a clique tree: each new hyperedge shares part of an existing one."""
    edges = [tuple(range(min(n_vars, rng.integers(1, 4))))]
    nxt = len(edges[0])
    while nxt < n_vars:
        host = edges[rng.integers(len(edges))]
        keep = [v for v in host if rng.random() < 0.6]
        new = list(range(nxt, min(n_vars, nxt + rng.integers(1, 3))))
        nxt += len(new)
        edges.append(tuple(keep + new))
    return edges


def signed_joint(rng, cards, signed):
    w = rng.dirichlet(np.ones(int(np.prod(cards)))).reshape(cards)
    if signed:
        w = w + rng.normal(scale=0.3 / w.size, size=w.shape)
    return QuasiDistribution(w / w.sum())
