import numpy as np
import pytest

from pdolab.basis import check_basis, local_eigensystem, luders_projectors, make_basis
from pdolab.errors import InvalidDimensionError

from .conftest import PAULIS


def test_qubit_basis_is_pauli():
    assert np.allclose(make_basis(2).ops, PAULIS)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_invariants(d):
    viol = check_basis(make_basis(d))
    assert max(viol.values()) < 1e-12


@pytest.mark.parametrize("d", [1, 0, 2.5])
def test_bad_dimension(d):
    with pytest.raises(InvalidDimensionError):
        make_basis(d)


def test_ops_read_only():
    with pytest.raises(ValueError):
        make_basis(2).ops[0, 0, 0] = 3


@pytest.mark.parametrize("d", [2, 3])
def test_coefficients_roundtrip(d):
    rng = np.random.default_rng(0)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = a + a.conj().T
    b = make_basis(d)
    assert np.allclose(b.reconstruct(b.coefficients(h)), h)


@pytest.mark.parametrize("d,mu", [(2, 1), (2, 3), (3, 4), (3, 8)])
def test_eigensystems_reassemble(d, mu):
    s = make_basis(d).ops[mu]
    lams, vecs = local_eigensystem(d, mu)
    assert np.allclose(sum(l * np.outer(v, v.conj()) for l, v in zip(lams, vecs)), s)
    proj = luders_projectors(d, mu)
    assert np.allclose(sum(l * p for l, p in proj), s)
    assert np.allclose(sum(p for _, p in proj), np.eye(d))


def test_degenerate_gell_mann_groups():
    # the second qutrit diagonal element is diag(1, 1, -2) up to scale
    proj = luders_projectors(3, 8)
    assert [round(np.trace(p).real) for _, p in proj] == [1, 2]
    assert len(luders_projectors(3, 1)) == 3
