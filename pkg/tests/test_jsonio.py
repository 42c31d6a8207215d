import numpy as np
import pytest

from pdolab import jsonio


def test_canonical_output():
    text = jsonio.dumps({"b": 0.1, "a": [1, 2]})
    assert text.index('"a"') < text.index('"b"') and text.endswith("\n")
    assert jsonio.loads(text)["b"] == 0.1


def test_nan_rejected():
    with pytest.raises(ValueError):
        jsonio.dumps({"x": float("nan")})


def test_parse_error_has_location():
    with pytest.raises(jsonio.ParseError, match=r"f\.json:2:"):
        jsonio.loads('{"a": 1,\n  }', "f.json")


def test_matrix_codec():
    m = np.array([[1 + 2j, 0.5], [0, -1j]])
    assert np.array_equal(jsonio.decode_matrix(jsonio.encode_matrix(m)), m)
    assert np.array_equal(jsonio.decode_matrix([[1, 0], [0, 1]]), np.eye(2))
    rect = np.arange(6).reshape(3, 2) * 1j
    assert np.array_equal(jsonio.decode_matrix(jsonio.encode_matrix(rect)), rect)
    with pytest.raises(jsonio.ParseError):
        jsonio.decode_matrix([[1, 2], [3]])


def test_missing_field():
    with pytest.raises(jsonio.ParseError, match="'dims'"):
        jsonio.field({}, "dims", "x.json")


def test_float_round_trip_exact():
    vals = np.random.default_rng(0).normal(size=50).tolist()
    assert jsonio.loads(jsonio.dumps(vals)) == vals
