"""Exact PDOs of circuit scenarios.

A circuit has ``K`` intervals and instants ``0 .. K``: the initial state
lives at instant 0 and interval ``k`` maps instant ``k`` to ``k + 1``.
Events are (wire, instant) points where a generalized Pauli operator is
measured with the Lueders rule.

Measuring ``s`` and weighting each outcome by its eigenvalue is the linear
map ``M_s(rho) = sum_k lam_k P_k rho P_k``. Chaining these maps with the
interval channels and taking the trace reproduces the sum over outcome
strings of (product of outcomes) x (branch probability), so no branch is
ever enumerated explicitly.
"""

from dataclasses import dataclass, field
from functools import reduce
from itertools import product as iproduct
from math import prod

import numpy as np

from . import jsonio
from .basis import luders_projectors, make_basis
from .errors import DimensionMismatchError, SizeCapError, TraceError
from .pdo import Pdo, from_matrix

KRAUS_TOL = 1e-10


@dataclass(frozen=True)
class Event:
    wire: int
    t: int
    label: object = None

    @property
    def name(self):
        return f"w{self.wire}t{self.t}" if self.label is None else self.label


@dataclass(frozen=True)
class Interval:
    """One time step: disjoint wire blocks, each with its own Kraus set.

    Wires absent from every block evolve trivially.
    """

    partition: tuple
    kraus: tuple


@dataclass(frozen=True, eq=False)
class CircuitSpec:
    """Initial state, interval channels and event markers.

    Parameters
    ----------
    dims : sequence of int
        Local dimension of each wire.
    rho0 : ndarray
        Density matrix of all wires at instant 0 (wire 0 most significant).
    intervals : sequence of Interval
    events : sequence of Event
    """

    dims: tuple
    rho0: np.ndarray
    intervals: tuple = ()
    events: tuple = ()
    _full_kraus: tuple = field(default=None, repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        rho = np.array(self.rho0, dtype=np.complex128)
        side = prod(dims)
        if rho.shape != (side, side):
            raise DimensionMismatchError(f"rho0 has shape {rho.shape}, wires need {side}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("rho0 is not Hermitian")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise TraceError("rho0 must have unit trace")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise ValueError("rho0 is not positive semidefinite")
        intervals = tuple(
            iv if isinstance(iv, Interval) else Interval(tuple(map(tuple, iv[0])), tuple(iv[1])) for iv in self.intervals
        )
        events = tuple(e if isinstance(e, Event) else Event(*e) for e in self.events)
        seen = set()
        for e in events:
            if not 0 <= e.wire < len(dims) or not 0 <= e.t <= len(intervals):
                raise ValueError(f"event {e} outside {len(dims)} wires and instants 0..{len(intervals)}")
            if (e.wire, e.t) in seen:
                raise ValueError(f"duplicate event at wire {e.wire}, instant {e.t}")
            seen.add((e.wire, e.t))
        names = [e.name for e in events]
        if len(set(names)) != len(names):
            raise ValueError("event labels must be unique")
        full = tuple(_full_kraus(dims, iv) for iv in intervals)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "rho0", rho)
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "_full_kraus", full)

    @property
    def labels(self):
        return tuple(e.name for e in self.events)


def _embed(op, block, dims):
    """Lift an operator on the wires of ``block`` (in that order) to all wires."""
    rest = [w for w in range(len(dims)) if w not in block]
    order = list(block) + rest
    d_rest = prod(dims[w] for w in rest)
    full = np.kron(op, np.eye(d_rest))
    n = len(dims)
    shape = [dims[w] for w in order]
    full = full.reshape(shape + shape)
    inv = np.argsort(order)
    full = full.transpose(list(inv) + [n + i for i in inv])
    side = prod(dims)
    return full.reshape(side, side)


def _full_kraus(dims, interval):
    used = [w for block in interval.partition for w in block]
    if len(set(used)) != len(used) or any(not 0 <= w < len(dims) for w in used):
        raise ValueError(f"partition {interval.partition} is not a set of disjoint valid wire blocks")
    if len(interval.kraus) != len(interval.partition):
        raise ValueError("one Kraus set per partition block required")
    lifted = []
    for block, ops in zip(interval.partition, interval.kraus):
        d = prod(dims[w] for w in block)
        ops = [np.asarray(a, dtype=np.complex128) for a in ops]
        if any(a.shape != (d, d) for a in ops):
            raise DimensionMismatchError(f"Kraus operators for block {block} must be {d}x{d}")
        completeness = sum(a.conj().T @ a for a in ops)
        if np.max(np.abs(completeness - np.eye(d))) > KRAUS_TOL:
            raise ValueError(f"Kraus set of block {block} is not trace preserving")
        lifted.append([_embed(a, block, dims) for a in ops])
    if not lifted:
        return (np.eye(prod(dims), dtype=np.complex128),)
    # blocks act on disjoint wires, so their lifted operators commute
    return tuple(reduce(np.matmul, combo) for combo in iproduct(*lifted))


def _apply_kraus(ops, rho):
    return sum(a @ rho @ a.conj().T for a in ops)


def _luders_ops(dims, wire, mu):
    """Lifted (eigenvalue, projector) pairs of basis element ``mu`` on ``wire``."""
    return [(lam, _embed(proj, (wire,), dims)) for lam, proj in luders_projectors(dims[wire], mu)]


def _measure(rho, pairs):
    return sum(lam * (proj @ rho @ proj) for lam, proj in pairs)


def _schedule(spec):
    # process events by instant, ties by wire; returns positions into spec.events
    return sorted(range(len(spec.events)), key=lambda k: (spec.events[k].t, spec.events[k].wire))


def correlator(spec, paulis):
    """Expectation of the space-time product of basis operators at the events.

    ``paulis[k]`` is the basis index measured at ``spec.events[k]``; index 0
    means no measurement at that event.
    """
    paulis = list(paulis)
    if len(paulis) != len(spec.events):
        raise ValueError(f"need {len(spec.events)} basis indices, got {len(paulis)}")
    rho = spec.rho0
    t_now = 0
    for k in _schedule(spec):
        e = spec.events[k]
        while t_now < e.t:
            rho = _apply_kraus(spec._full_kraus[t_now], rho)
            t_now += 1
        if paulis[k]:
            rho = _measure(rho, _luders_ops(spec.dims, e.wire, paulis[k]))
    return float(np.trace(rho).real)


def build_pdo(spec, max_events=4):
    """Fill the correlation tensor of all events by depth-first branching.

    Prefixes of the measurement schedule are shared between index tuples,
    so each intermediate operator is computed once.
    """
    n = len(spec.events)
    if n == 0:
        raise ValueError("circuit has no events")
    if n > max_events:
        raise SizeCapError(f"{n} events exceed the cap of {max_events}")
    ev_dims = tuple(spec.dims[e.wire] for e in spec.events)
    if prod(ev_dims) > 2**10:
        raise SizeCapError("PDO exceeds the dense size cap")
    order = _schedule(spec)
    tensor = np.zeros([d * d for d in ev_dims])
    luders = {(e.wire, mu): _luders_ops(spec.dims, e.wire, mu) for e in spec.events for mu in range(1, spec.dims[e.wire] ** 2)}
    index = [0] * n

    def walk(depth, rho, t_now):
        if depth == n:
            tensor[tuple(index)] = np.trace(rho).real
            return
        k = order[depth]
        e = spec.events[k]
        while t_now < e.t:
            rho = _apply_kraus(spec._full_kraus[t_now], rho)
            t_now += 1
        for mu in range(spec.dims[e.wire] ** 2):
            index[k] = mu
            walk(depth + 1, rho if mu == 0 else _measure(rho, luders[(e.wire, mu)]), t_now)
        index[k] = 0

    walk(0, spec.rho0, 0)
    tensor[(0,) * n] = 1.0
    return Pdo(ev_dims, tensor, spec.labels)


def swap_operator(d):
    """``SWAP = (1/d) sum_mu s_mu (x) s_mu``."""
    ops = make_basis(d).ops
    return np.einsum("mij,mkl->ikjl", ops, ops).reshape(d * d, d * d) / d


def temporal_two_event(rho, kraus, labels=None):
    """Two events on one wire separated by the channel ``kraus``.

    Returns ``(id (x) E)({rho (x) I, SWAP}) / 2``, which has unit trace for
    every local dimension.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    d = rho.shape[0]
    ops = [np.asarray(a, dtype=np.complex128) for a in kraus]
    if rho.shape != (d, d) or any(a.shape != (d, d) for a in ops):
        raise DimensionMismatchError("state and Kraus operators must share one dimension")
    a = np.kron(rho, np.eye(d))
    s = swap_operator(d)
    r = (a @ s + s @ a) / 2
    r = sum(np.kron(np.eye(d), k) @ r @ np.kron(np.eye(d), k).conj().T for k in ops)
    return from_matrix(r, (d, d), labels)


def spec_from_json(obj, source="<input>"):
    f = lambda key: jsonio.field(obj, key, source)  # noqa: E731
    dims = f("dims")
    if int(f("wires")) != len(dims):
        raise jsonio.ParseError(f"{source}: 'wires' disagrees with the length of 'dims'")
    intervals = []
    for k, iv in enumerate(obj.get("intervals", [])):
        partition = tuple(tuple(int(w) for w in block) for block in jsonio.field(iv, "partition", f"{source} interval {k}"))
        kraus = tuple(
            tuple(jsonio.decode_matrix(m) for m in ops) for ops in jsonio.field(iv, "kraus", f"{source} interval {k}")
        )
        intervals.append(Interval(partition, kraus))
    events = [Event(int(jsonio.field(e, "wire", source)), int(jsonio.field(e, "t", source)), e.get("label")) for e in obj.get("events", [])]
    return CircuitSpec(dims, jsonio.decode_matrix(f("rho0")), tuple(intervals), tuple(events))


def spec_to_json(spec):
    out = {
        "wires": len(spec.dims),
        "dims": list(spec.dims),
        "rho0": jsonio.encode_matrix(spec.rho0),
        "intervals": [
            {"partition": [list(b) for b in iv.partition], "kraus": [[jsonio.encode_matrix(a) for a in ops] for ops in iv.kraus]}
            for iv in spec.intervals
        ],
        "events": [],
    }
    for e in spec.events:
        item = {"wire": e.wire, "t": e.t}
        if e.label is not None:
            item["label"] = e.label
        out["events"].append(item)
    return out
