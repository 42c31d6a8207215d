import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from pdolab import channel as C
from pdolab import jsonio
from pdolab import pdo as P
from pdolab.errors import NoMarginalChannelError, NotTracePreservingError
from pdolab.samplers import random_channel, random_density, random_pdo, random_unitary

from .conftest import PAULIS

seeds = st.integers(0, 10**6)
io_dims = st.sampled_from([((2,), (2,)), ((2,), (3,)), ((3,), (2,)), ((2, 2), (2,)), ((2,), (2, 2))])


@given(dims=io_dims, seed=seeds, cptp=st.booleans())
def test_choi_duality(dims, seed, cptp):
    c = random_channel(*dims, seed=seed, cptp=cptp)
    j = C.choi(c)
    r = random_pdo(c.in_dims, seed).matrix
    assert np.max(np.abs(C.apply_choi(j, r, c.d_in, c.d_out) - C.apply_matrix(c, r))) < 1e-10
    back = C.from_choi(j, c.in_dims, c.out_dims)
    assert np.max(np.abs(C.apply_matrix(back, r) - C.apply_matrix(c, r))) < 1e-10


@given(seed=seeds)
def test_choi_trace_condition(seed):
    c = random_channel((2,), (3,), seed=seed)
    j = C.choi(c).reshape(3, 2, 3, 2)
    assert np.allclose(np.einsum("aiaj->ij", j), np.eye(2) / 2)
    assert abs(np.trace(C.choi(c)) - 1) < 1e-12


def test_identity_choi_is_max_entangled():
    j = C.choi(C.identity_channel((2,)))
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(j, np.outer(phi, phi))


def test_transpose_map_exact():
    t = C.transpose_map()
    r = random_pdo((2,), 3).matrix
    assert np.allclose(C.apply_matrix(t, r), r.T, atol=1e-14)
    assert any(w < 0 for w, _ in t.kraus)


def test_not_trace_preserving():
    with pytest.raises(NotTracePreservingError):
        C.PseudoChannel((2,), (2,), [(1.0, 2 * np.eye(2))])


def test_apply_keeps_labels_for_endomorphisms():
    p = random_pdo((2,), 1, labels=("x",))
    assert C.apply(C.depolarizing(2), p).labels == ("x",)
    assert np.allclose(C.apply(C.depolarizing(2), p).tensor, np.diag([1.0, 0, 0, 0])[0])


@given(seed=seeds)
def test_marginal_of_product_channel(seed):
    c1 = random_channel((2,), (2,), seed=seed)
    c2 = random_channel((2,), (3,), seed=seed + 1)
    prod = C.tensor_channel(c1, c2)
    m = C.marginal_channel(prod, [0], [0])
    r1 = random_pdo((2,), seed).matrix
    r2 = random_pdo((2,), seed + 2).matrix
    # applying the marginal to one factor equals reducing the product output
    full = C.apply_matrix(prod, np.kron(r1, r2))
    reduced = np.einsum("iaja->ij", full.reshape(2, 3, 2, 3))
    assert np.max(np.abs(C.apply_matrix(m, r1) - reduced)) < 1e-9
    assert np.max(np.abs(C.apply_matrix(m, r1) - C.apply_matrix(c1, r1))) < 1e-9


def test_swap_has_no_marginal():
    with pytest.raises(NoMarginalChannelError) as exc:
        C.marginal_channel(C.swap_channel(2), [0], [0])
    assert exc.value.residual > 0.5


def test_identity_marginal():
    m = C.marginal_channel(C.identity_channel((2, 2)), [1], [1])
    r = random_pdo((2,), 0).matrix
    assert np.allclose(C.apply_matrix(m, r), r)


@given(seed=seeds)
def test_channel_marginal_completions_are_trace_preserving(seed):
    a = C.PseudoChannel((2,), (2,), random_channel((2,), (2,), seed=seed).kraus, ("x",), ("x2",))
    b = C.PseudoChannel((2,), (2,), random_channel((2,), (2,), seed=seed + 1).kraus, ("y",), ("y2",))
    fam, scen = C.solve_channel_marginal([a, b])
    rng = np.random.default_rng(seed)
    for _ in range(5):
        comp = fam.complete(rng.uniform(-1, 1, fam.n_free))
        assert C.tp_residual(comp) < 1e-10
        ch = C.channel_from_completion(comp)
        r = random_pdo((2, 2), seed).matrix
        out = C.apply_matrix(ch, r)
        assert abs(np.trace(out) - 1) < 1e-10


def test_channel_solution_reproduces_parts():
    a = C.PseudoChannel((2,), (2,), C.depolarizing(2).kraus, ("x",), ("x",))
    u = random_unitary(2, 4)
    b = C.PseudoChannel((2,), (2,), [(1.0, u)], ("y",), ("y",))
    fam, _ = C.solve_channel_marginal([a, b])
    ch = C.channel_from_completion(fam.base_point)
    m = C.marginal_channel(ch, [1], [1])
    r = random_density(2, np.random.default_rng(1))
    assert np.allclose(C.apply_matrix(m, r), u @ r @ u.conj().T, atol=1e-9)


def test_natural_and_stinespring():
    c = random_channel((2,), (3,), seed=9)
    r = random_pdo((2,), 9).matrix
    assert np.allclose((C.natural(c) @ r.reshape(-1)).reshape(3, 3), C.apply_matrix(c, r))
    a, b = C.stinespring(c)
    assert np.allclose(a.conj().T @ b, np.eye(2))
    assert np.allclose(C.apply_stinespring(a, b, r, 3), C.apply_matrix(c, r))


def test_replacement_channel():
    rho = random_density(3, np.random.default_rng(2))
    c = C.replacement_channel(rho, 2)
    assert np.allclose(C.apply_matrix(c, random_pdo((2,), 4).matrix), rho)


def test_no_cloning():
    copier = C.PseudoChannel((2,), (2, 2), [(1.0, np.eye(4)[:, [0, 3]])])
    zero = P.from_matrix(np.diag([1.0, 0]), (2,))
    one = P.from_matrix(np.diag([0.0, 1]), (2,))
    rep = C.no_cloning_check([copier], [zero, one])
    row = rep["candidates"][0]
    assert row["linearity"] < 1e-12
    assert row["cloning"][0] < 1e-12 and row["cloning"][1] < 1e-12
    assert row["cloning"][2] > 0.5 and not rep["any_clones_all"]


def test_lindblad_matches_matrix_exponential():
    h = np.array([[1.0, 0.3], [0.3, -0.5]])
    gen = C.Lindbladian((2,), h, ((0.4, np.array([[0, 1], [0, 0]])), (0.2, PAULIS[3])))
    p = random_pdo((2,), 5)
    out = C.evolve(gen, p, 2.0, 1e-3)
    ref = (expm(2.0 * gen.superoperator()) @ p.matrix.reshape(-1)).reshape(2, 2)
    assert np.max(np.abs(out.matrix - ref)) < 1e-9
    # the generator matrix acts like the map itself
    r = p.matrix
    assert np.allclose((gen.superoperator() @ r.reshape(-1)).reshape(2, 2), gen(r))


def test_dephasing_relaxes_to_mixed():
    p = P.from_matrix((np.eye(2) + PAULIS[1]) / 2, (2,))
    out = C.evolve(C.dephasing(1.0), p, 10.0, 1e-2)
    assert np.max(np.abs(out.matrix - np.eye(2) / 2)) < 1e-8


def test_steady_states():
    assert np.allclose(C.steady_state(C.dephasing()).matrix, np.eye(2) / 2)
    assert np.allclose(C.steady_state(C.amplitude_damping()).matrix, np.diag([1.0, 0]), atol=1e-9)
    assert np.allclose(C.steady_state(C.Lindbladian((3,))).matrix, np.eye(3) / 3)


def test_json_roundtrip():
    c = random_channel((2,), (2, 2), seed=3)
    again = C.from_json(jsonio.loads(jsonio.dumps(C.to_json(c))))
    assert again.in_labels == c.in_labels and np.allclose(C.choi(again), C.choi(c))
    gen = C.amplitude_damping(0.3)
    g2 = C.lindbladian_from_json(jsonio.loads(jsonio.dumps(C.lindbladian_to_json(gen))))
    assert np.allclose(g2.superoperator(), gen.superoperator())
