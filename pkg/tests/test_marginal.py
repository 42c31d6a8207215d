from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdolab import jsonio
from pdolab import marginal as M
from pdolab import pdo as P
from pdolab.channel import unitary_channel
from pdolab.errors import DimensionMismatchError, IncompatibleError, SupportError
from pdolab.samplers import random_density, random_pdo, random_unitary

from .conftest import PAULIS

SINGLET = P.Pdo((2, 2), np.diag([1.0, -1, -1, -1]), ("A", "B"))


def triangle():
    return M.MarginalScenario(tuple(P.maximally_mixed((2, 2), l) for l in [("A", "B"), ("B", "C"), ("A", "C")]))


def test_triangle_family():
    s = triangle()
    f = M.solve_herm1(s)
    assert f.n_free == 27
    assert all(all(i > 0 for i in idx) for idx in f.free_index_set)
    assert M.reduce_check(f, s) == 0.0


@given(seed=st.integers(0, 10**6), data=st.data())
def test_random_scenarios_reduce_back(seed, data):
    n = data.draw(st.integers(2, 4))
    labels = [f"e{i}" for i in range(n)]
    glob = random_pdo((2,) * n, seed, labels=labels)
    subsets = data.draw(
        st.lists(st.sets(st.sampled_from(labels), min_size=1, max_size=n - 1), min_size=1, max_size=4)
    )
    parts = tuple(P.partial_trace(glob, sorted(s)) for s in subsets)
    s = M.MarginalScenario(parts)
    f = M.solve_herm1(s)
    assert M.reduce_check(f, s) < 1e-10
    rng = np.random.default_rng(seed)
    for _ in range(3):
        assert M.reduce_check(f.complete(rng.uniform(-1, 1, f.n_free)), s) < 1e-10


def test_global_state_lies_in_family():
    glob = random_pdo((2, 3, 2), 11, labels="abc")
    s = M.MarginalScenario((P.partial_trace(glob, "ab"), P.partial_trace(glob, "bc")))
    f = M.solve_herm1(s)
    values = glob.tensor[~f.mask]
    assert np.allclose(f.complete(values).tensor, glob.tensor)


def test_free_matrices_are_directions():
    f = M.solve_herm1(triangle())
    mats = f.free_matrices()
    x = np.random.default_rng(0).normal(size=f.n_free)
    assert np.allclose(f.base_point.matrix + np.tensordot(x, mats, axes=1), f.complete(x).matrix)


def test_incompatible_reports_pair():
    a = P.from_matrix(np.kron(random_density(2, 1), np.eye(2) / 2), (2, 2), ("A", "B"))
    b = P.from_matrix(np.kron(random_density(2, 2), np.eye(2) / 2), (2, 2), ("A", "C"))
    with pytest.raises(IncompatibleError) as exc:
        M.MarginalScenario((a, P.maximally_mixed((2, 2), ("B", "C")), b))
    assert exc.value.pair == (0, 2) and exc.value.deviation > 1e-3


def test_dimension_clash():
    with pytest.raises(DimensionMismatchError):
        M.MarginalScenario((P.maximally_mixed((2,), ("A",)), P.maximally_mixed((3,), ("A",))))


def test_dominated_parts_dropped():
    ab = random_pdo((2, 2), 3, labels="AB")
    s = M.MarginalScenario((P.partial_trace(ab, "A"), ab))
    assert len(s.parts) == 1 and s.events == ("A", "B")


def test_positive_filter_finds_state():
    rho = random_density(8, np.random.default_rng(5))
    glob = P.from_matrix(rho, (2, 2, 2), "ABC")
    s = M.MarginalScenario((P.partial_trace(glob, "AB"), P.partial_trace(glob, "BC")))
    res = M.filter_positive(M.solve_herm1(s), starts=4, iterations=300)
    assert res.found and res.pdo.eigenvalues.min() >= -1e-10
    assert M.reduce_check(res.pdo, s) < 1e-10


def test_positive_filter_is_deterministic():
    s = M.MarginalScenario((SINGLET, SINGLET.relabel(("A", "C"))))
    r1 = M.filter_positive(M.solve_herm1(s), starts=4, iterations=100, threads=1)
    r2 = M.filter_positive(M.solve_herm1(s), starts=4, iterations=100, threads=3)
    assert not r1.found and r1.min_eigenvalue == r2.min_eigenvalue < 0


def test_halfspace_filter():
    m = P.maximally_mixed((2,))
    f = M.solve_herm1(M.MarginalScenario((m.relabel(("A",)), m.relabel(("B",)))))
    proj = np.outer(SINGLET.matrix[:, 1], SINGLET.matrix[:, 1]) / SINGLET.matrix[1, 1]
    res = M.filter_halfspaces(f, [M.HalfSpace(proj, 0.9)])
    assert res.found and np.trace(res.pdo.matrix @ proj).real >= 0.9 - 1e-9
    # every completion has |T| <= 2 per entry, so tr(R I) = 1 can never reach 2
    assert not M.filter_halfspaces(f, [M.HalfSpace(np.eye(4), 2.0)]).found


def test_hull_filter():
    m = P.maximally_mixed((2,))
    f = M.solve_herm1(M.MarginalScenario((m.relabel(("A",)), m.relabel(("B",)))))
    verts = [P.Pdo((2, 2), np.eye(4), "AB"), SINGLET.relabel("AB")]
    res = M.filter_hull(f, verts)
    assert res.found and M.in_hull(res.pdo, verts)
    assert np.max(np.abs(res.pdo.tensor[f.mask] - f.fixed[f.mask])) < 1e-12
    # a vertex with the wrong marginal must get zero weight
    skew = P.from_matrix(np.diag([1.0, 0, 0, 0]), (2, 2), "AB")
    res = M.filter_hull(f, verts + [skew])
    assert res.found and abs(res.pdo.tensor[3, 0]) < 1e-12
    assert not M.filter_hull(f, [skew]).found


def test_symmetric_extension_reductions():
    w = random_pdo((2, 2), 8, labels="AB")
    ext = M.symmetric_extension(w, 4)
    assert ext.labels == ("A", "B#1", "B#2", "B#3")
    for b in ext.labels[1:]:
        assert np.max(np.abs(P.partial_trace(ext, ["A", b]).tensor - w.tensor)) < 1e-12


def dense_polygamy(n):
    """``(I - sum_i Omega_i) / 2**(n+1)`` built from explicit Kronecker products."""
    dim = 2 ** (n + 1)
    op = np.eye(dim, dtype=complex)
    for i in range(1, n + 1):
        for s in PAULIS[1:]:
            ops = [np.eye(2)] * (n + 1)
            ops[0] = ops[i] = s
            term = ops[0]
            for o in ops[1:]:
                term = np.kron(term, o)
            op = op - term
    return op / dim


@pytest.mark.parametrize("n", [1, 2, 3])
def test_polygamy_matches_dense(n):
    p = M.polygamy_extension(n)
    assert np.max(np.abs(p.matrix - dense_polygamy(n))) < 1e-12
    for i in range(1, n + 1):
        red = P.partial_trace(p, ["A", f"B{i}"])
        assert np.max(np.abs(red.tensor - SINGLET.tensor)) < 1e-10


def test_polygamy_two_copies_spectrum():
    lam = np.sort(M.polygamy_extension(2).eigenvalues)
    assert np.allclose(lam, [-1 / 8] * 4 + [1 / 8] * 2 + [5 / 8] * 2, atol=1e-10)


def test_polygamy_free_tensor():
    xi = np.zeros((4, 4, 4))
    xi[0, 3, 3] = 0.5
    p = M.polygamy_extension(2, xi)
    assert p.tensor[0, 3, 3] == 0.5
    assert np.allclose(P.partial_trace(p, ["A", "B1"]).tensor, SINGLET.tensor)
    bad = np.zeros((4, 4, 4))
    bad[1, 1, 0] = 0.1
    with pytest.raises(SupportError):
        M.polygamy_extension(2, bad)


def test_symmetry_inherited_by_parts():
    glob = M.polygamy_extension(2)
    s = M.MarginalScenario(tuple(P.partial_trace(glob, ["A", b]) for b in ("B1", "B2")))
    u = random_unitary(2, 3)
    g = unitary_channel(np.kron(np.kron(u, u), u), (2, 2, 2))
    rep = M.check_symmetry(s, glob, [g])
    assert rep and rep.global_fixed and max(rep.part_residuals) < 1e-9


def test_symmetry_global_not_symmetric():
    glob = M.polygamy_extension(2)
    s = M.MarginalScenario(tuple(P.partial_trace(glob, ["A", b]) for b in ("B1", "B2")))
    g = unitary_channel(np.kron(PAULIS[3], np.eye(4)), (2, 2, 2))
    rep = M.check_symmetry(s, glob, [g])
    assert not rep and rep.message == "global not symmetric"


def test_scenario_json_roundtrip():
    s = triangle()
    again = M.scenario_from_json(jsonio.loads(jsonio.dumps(M.scenario_to_json(s))))
    assert again.events == s.events and M.solve_herm1(again).n_free == 27
    fam = M.family_to_json(M.solve_herm1(s))
    assert fam["n_free"] == 27 and len(fam["free_indices"]) == 27


def test_polygamy_with_b_pair_term():
    # Xi = -(XX + YY + ZZ) on the two copies turns the operator into (4I - 2 sum of all SWAPs) / 8
    xi = np.zeros((4, 4, 4))
    for mu in (1, 2, 3):
        xi[0, mu, mu] = -1.0
    p = M.polygamy_extension(2, xi)
    assert np.allclose(np.sort(p.eigenvalues), [-0.25] * 4 + [0.5] * 4, atol=1e-10)
    assert np.allclose(P.partial_trace(p, ["A", "B2"]).tensor, SINGLET.tensor)
