import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdolab import classical as CL
from pdolab import pdo as P
from pdolab.errors import IncompatibleError, NotChordalError, ZeroSeparatorError
from pdolab.quasi import QuasiDistribution, marginalize
from pdolab.samplers import random_density, random_unitary

from .conftest import random_chordal_hyperedges, signed_joint


def test_small_graphs():
    assert CL.is_chordal(CL.CompatibilityGraph([("a", "b"), ("b", "c"), ("a", "c")]))
    assert CL.is_chordal(CL.CompatibilityGraph([("a", "b"), ("b", "c"), ("c", "d")]))
    cycle = CL.CompatibilityGraph([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
    res = CL.is_chordal(cycle)
    assert not res and res.ordering is None
    with pytest.raises(NotChordalError):
        CL.solve_chordal(cycle, [QuasiDistribution(np.full((2, 2), 0.25), e) for e in cycle.hyperedges])


@given(seed=st.integers(0, 10**6), n=st.integers(3, 7), p=st.floats(0.2, 0.8))
def test_chordality_matches_networkx(seed, n, p):
    g = nx.gnp_random_graph(n, p, seed=seed)
    edges = list(g.edges())
    if not edges:
        return
    cg = CL.CompatibilityGraph(edges)
    assert bool(CL.is_chordal(cg)) == nx.is_chordal(g.subgraph(cg.vertices))


def test_hyperedges_expand_to_cliques():
    # a 4-cycle plus a hyperedge covering a chord is chordal
    g = CL.CompatibilityGraph([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "b", "c")])
    assert CL.is_chordal(g)
    assert sorted(map(sorted, CL.maximal_cliques(g))) == [["a", "b", "c"], ["a", "c", "d"]]


@given(seed=st.integers(0, 10**6), signed=st.booleans())
def test_solve_chordal_reproduces_parts(seed, signed):
    rng = np.random.default_rng(seed)
    n_vars = int(rng.integers(2, 6))
    edges = random_chordal_hyperedges(rng, n_vars)
    cards = tuple(int(c) for c in rng.integers(2, 4, size=n_vars))
    joint = signed_joint(rng, cards, signed)
    parts = [marginalize(joint, h) for h in edges]
    g = CL.CompatibilityGraph(edges)
    out = CL.solve_chordal(g, parts)
    for h, q in zip(edges, parts):
        assert np.max(np.abs(marginalize(out, h).weights - q.weights)) < 1e-9


def test_uncovered_clique_is_completed():
    # pairwise marginals of a triangle: the clique {a, b, c} is in no hyperedge
    rng = np.random.default_rng(2)
    joint = QuasiDistribution(rng.dirichlet(np.ones(8)).reshape(2, 2, 2), "abc")
    edges = [("a", "b"), ("b", "c"), ("a", "c")]
    out = CL.solve_chordal(CL.CompatibilityGraph(edges), [marginalize(joint, e) for e in edges])
    for e in edges:
        assert np.allclose(marginalize(out, e).weights, marginalize(joint, e).weights, atol=1e-12)


def test_incompatible_parts():
    a = QuasiDistribution([[0.5, 0], [0, 0.5]], "xy")
    b = QuasiDistribution([[0.1, 0.2], [0.3, 0.4]], "yz")
    with pytest.raises(IncompatibleError):
        CL.solve_chordal(CL.CompatibilityGraph(["xy", "yz"]), [a, b])


def test_zero_separator():
    a = QuasiDistribution([[0.5, 0.0], [0.5, 0.0]], "xy")
    ok = QuasiDistribution([[0.5, 0.5], [0.0, 0.0]], "yz")
    out = CL.solve_chordal(CL.CompatibilityGraph(["xy", "yz"]), [a, ok])
    assert np.allclose(marginalize(out, "yz").weights, ok.weights)
    # y = 1 has total weight 0 on both sides but signed nonzero entries
    left = QuasiDistribution([[0.5, 0.3], [0.5, -0.3]], "xy")
    right = QuasiDistribution([[0.5, 0.5], [0.2, -0.2]], "yz")
    with pytest.raises(ZeroSeparatorError):
        CL.solve_chordal(CL.CompatibilityGraph(["xy", "yz"]), [left, right])


def test_embedding_commutes_with_marginals():
    rng = np.random.default_rng(4)
    joint = signed_joint(rng, (2, 3, 2), signed=True)
    joint = QuasiDistribution(joint.weights, "abc")
    bases = [random_unitary(2, 1), random_unitary(3, 2), np.eye(2)]
    w = CL.embed_classical_state(joint, bases)
    for keep in (["a", "b"], ["b", "c"], ["c"]):
        sub = [bases["abc".index(v)] for v in keep]
        expected = CL.embed_classical_state(marginalize(joint, keep), sub)
        assert np.max(np.abs(P.partial_trace(w, keep).tensor - expected.tensor)) < 1e-9
    # diagonal in the product basis with the joint weights on the diagonal
    u = np.kron(np.kron(bases[0], bases[1]), bases[2])
    assert np.allclose(u.conj() @ w.matrix @ u.T, np.diag(joint.weights.ravel()), atol=1e-12)


def test_embedding_rejects_incomplete_basis():
    from pdolab.errors import IncompleteBasisError

    q = QuasiDistribution([0.5, 0.5])
    with pytest.raises(IncompleteBasisError):
        CL.embed_classical_state(q, [np.array([[1, 0], [1, 0]])])


def test_local_unitary_equivalence():
    rng = np.random.default_rng(0)
    w1 = P.from_matrix(random_density(4, rng), (2, 2))
    u = np.kron(random_unitary(2, 1), random_unitary(2, 2))
    w2 = P.from_matrix(u @ w1.matrix @ u.conj().T, (2, 2))
    res = CL.local_unitary_equivalent(w1, w2)
    assert res and res.residual < 1e-6
    v = np.kron(res.unitaries[0], res.unitaries[1])
    assert np.allclose(v @ w1.matrix @ v.conj().T, w2.matrix, atol=1e-5)
    other = P.from_matrix(random_density(4, rng), (2, 2))
    assert not CL.local_unitary_equivalent(w1, other)
