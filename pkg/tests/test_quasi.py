import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdolab import jsonio, quasi
from pdolab.errors import TraceError, UnknownEventError
from pdolab.quasi import QuasiDistribution, marginalize


def test_normalization_and_negativity():
    q = QuasiDistribution([[0.7, -0.2], [0.1, 0.4]], "xy")
    assert q.negativity == pytest.approx(0.2)
    with pytest.raises(TraceError):
        QuasiDistribution([0.5, 0.6])
    with pytest.raises(TypeError):
        QuasiDistribution(np.array([0.5, 0.5], dtype=complex))
    with pytest.raises(UnknownEventError):
        q.axis("z")


@given(seed=st.integers(0, 10**6))
def test_marginalize_order(seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(2, 3, 4))
    w[0, 0, 0] += 1 - w.sum()
    q = QuasiDistribution(w, "abc")
    m = marginalize(q, ["c", "a"])
    assert m.variables == ("c", "a")
    assert np.allclose(m.weights, w.sum(axis=1).T)


def test_json_roundtrip():
    q = QuasiDistribution([[0.7, -0.2], [0.1, 0.4]], ["x", "y"])
    again = quasi.from_json(jsonio.loads(jsonio.dumps(quasi.to_json(q))))
    assert np.array_equal(again.weights, q.weights) and again.variables == ("x", "y")
