import numpy as np
import pytest

from pdolab import pdo as P
from pdolab import samplers as S


def test_random_density():
    rho = S.random_density(3, 0, rank=1)
    lam = np.linalg.eigvalsh(rho)
    assert abs(np.trace(rho) - 1) < 1e-12 and lam.min() > -1e-12
    assert np.sum(lam > 1e-9) == 1


def test_random_unitary():
    u = S.random_unitary(4, 1)
    assert np.allclose(u @ u.conj().T, np.eye(4))


def test_random_pdo_reproducible_and_locally_positive():
    a, b = S.random_pdo((2, 3), 5), S.random_pdo((2, 3), 5)
    assert np.array_equal(a.tensor, b.tensor)
    for e in a.labels:
        assert np.linalg.eigvalsh(P.partial_trace(a, [e]).matrix).min() > -1e-12


def test_full_rank_gap():
    p = S.random_pdo((2, 2), 3, full_rank=True, min_gap=1e-3)
    assert np.abs(p.eigenvalues).min() > 1e-3


@pytest.mark.parametrize("cptp", [True, False])
def test_random_channel_is_tp(cptp):
    c = S.random_channel((2,), (3,), seed=2, cptp=cptp)
    assert np.allclose(sum(w * a.conj().T @ a for w, a in c.kraus), np.eye(2))
    assert all(w > 0 for w, _ in c.kraus) == cptp or not cptp
