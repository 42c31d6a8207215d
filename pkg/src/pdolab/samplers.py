"""Seeded random generators for states, PDOs, unitaries and channels."""

from math import prod

import numpy as np
from scipy.stats import unitary_group

from .pdo import Pdo, matrix_to_tensor


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(d, seed=None):
    return unitary_group.rvs(d, random_state=_rng(seed))


def random_density(d, seed=None, rank=None):
    """Random density matrix from a Ginibre matrix of the given rank."""
    rng = _rng(seed)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d, seed=None):
    rng = _rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_pdo(dims, seed=None, labels=None, scale=1.0, full_rank=False, min_gap=1e-6):
    """Random PDO with positive single-event reductions.

    Single-event entries come from random density matrices; every entry
    with two or more nonzero indices is uniform in ``[-scale, scale]``.
    With ``full_rank`` the draw is repeated until every eigenvalue has
    modulus above ``min_gap``.
    """
    rng = _rng(seed)
    dims = tuple(dims)
    n = len(dims)
    while True:
        t = rng.uniform(-scale, scale, size=[d * d for d in dims])
        t[(0,) * n] = 1.0
        for i, d in enumerate(dims):
            local = matrix_to_tensor(random_density(d, rng), (d,))
            idx = [0] * n
            for mu in range(1, d * d):
                idx[i] = mu
                t[tuple(idx)] = local[mu]
        p = Pdo(dims, t, labels)
        if not full_rank or np.min(np.abs(p.eigenvalues)) > min_gap:
            return p


def random_cptp_kraus(d_in, d_out, seed=None, n_kraus=3):
    """Kraus operators of a random CPTP map ``d_in -> d_out``."""
    rng = _rng(seed)
    g = rng.normal(size=(n_kraus, d_out, d_in)) + 1j * rng.normal(size=(n_kraus, d_out, d_in))
    m = np.einsum("aji,ajk->ik", g.conj(), g)
    vals, vecs = np.linalg.eigh(m)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.conj().T
    return [a @ inv_sqrt for a in g]


def random_hptp_weighted_kraus(d_in, d_out, seed=None, n_kraus=3):
    """Signed weights and operators with ``sum w A^dag A = I``.

    Random operators with random signs are completed to trace preservation
    by adding one rank-1 term per eigenvector of the remainder.
    """
    rng = _rng(seed)
    ops = list(rng.normal(size=(n_kraus, d_out, d_in)) + 1j * rng.normal(size=(n_kraus, d_out, d_in)))
    ops = [a / np.sqrt(d_in * d_out) for a in ops]
    weights = list(rng.choice([-1.0, 1.0], size=n_kraus) * rng.uniform(0.2, 1.0, size=n_kraus))
    rem = np.eye(d_in) - sum(w * a.conj().T @ a for w, a in zip(weights, ops))
    vals, vecs = np.linalg.eigh((rem + rem.conj().T) / 2)
    for k, lam in enumerate(vals):
        if abs(lam) < 1e-14:
            continue
        a = np.zeros((d_out, d_in), dtype=np.complex128)
        a[k % d_out] = np.sqrt(abs(lam)) * vecs[:, k].conj()
        ops.append(a)
        weights.append(float(np.sign(lam)))
    return [float(w) for w in weights], ops


def random_channel(in_dims, out_dims, seed=None, n_kraus=3, cptp=False):
    """Random :class:`~pdolab.channel.PseudoChannel` between event sets."""
    from .channel import PseudoChannel

    d_in, d_out = prod(in_dims), prod(out_dims)
    if cptp:
        ops = random_cptp_kraus(d_in, d_out, seed, n_kraus)
        weights = [1.0] * len(ops)
    else:
        weights, ops = random_hptp_weighted_kraus(d_in, d_out, seed, n_kraus)
    return PseudoChannel(tuple(in_dims), tuple(out_dims), list(zip(weights, ops)))
