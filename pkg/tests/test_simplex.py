import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from pdolab import simplex


def _bounded_lp(seed, m=4, n=7):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 1, size=n)
    # sum(x) + s = n + 1 keeps the region bounded
    a = np.vstack([np.hstack([a, np.zeros((m, 1))]), np.ones(n + 1)])
    b = np.append(a[:m, :n] @ x0, n + 1.0)
    c = rng.normal(size=n + 1)
    return c, a, b


@given(seed=st.integers(0, 10**6))
def test_matches_highs(seed, backend):
    c, a, b = _bounded_lp(seed)
    res = simplex.solve(c, a, b)
    ref = linprog(c, A_eq=a, b_eq=b, bounds=(0, None), method="highs")
    assert res.status == "optimal"
    assert abs(res.value - ref.fun) < 1e-7
    assert np.max(np.abs(a @ res.x - b)) < 1e-8 and res.x.min() > -1e-9


def test_infeasible():
    res = simplex.solve([0, 0], [[1, 1]], [-1])
    assert res.status == "infeasible" and res.infeasibility > 0
    assert simplex.feasible_point([[1, 1]], [-1]) is None


def test_unbounded():
    res = simplex.solve([-1, 0], [[1, -1]], [0])
    assert res.status == "unbounded"


def test_redundant_rows():
    a = [[1, 1, 0], [2, 2, 0], [0, 1, 1]]
    res = simplex.solve([1, 2, 3], a, [1, 2, 1])
    ref = linprog([1, 2, 3], A_eq=a, b_eq=[1, 2, 1], method="highs")
    assert res.status == "optimal" and abs(res.value - ref.fun) < 1e-9


def test_degenerate_cycling_example():
    # Beale's example cycles under the textbook rule; Bland's rule terminates
    c = np.array([-0.75, 150, -0.02, 6, 0, 0, 0])
    a = np.array(
        [
            [0.25, -60, -0.04, 9, 1, 0, 0],
            [0.5, -90, -0.02, 3, 0, 1, 0],
            [0, 0, 1, 0, 0, 0, 1],
        ]
    )
    res = simplex.solve(c, a, [0, 0, 1])
    assert res.status == "optimal" and abs(res.value + 0.05) < 1e-9
