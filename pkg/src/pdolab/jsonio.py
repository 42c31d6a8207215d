"""Canonical JSON encoding shared by every file format.

Keys are sorted and floats use Python's shortest round-trip ``repr``, so
identical values always produce byte-identical files. Complex numbers are
``[re, im]`` pairs and matrices are nested rows of such pairs.
"""

import json

import numpy as np


class ParseError(ValueError):
    """Malformed input file; message carries the line number when known."""


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def loads(text, source="<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), str(path))


def dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def encode_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(rows):
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("matrix must be nested rows of [re, im] pairs") from None
    if arr.ndim == 2:  # real-only shorthand
        return arr.astype(np.complex128)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ParseError(f"expected a matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def field(obj, key, source="<input>"):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise ParseError(f"{source}: missing field {key!r}") from None
