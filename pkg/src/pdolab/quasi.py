"""Normalized real weight arrays that may carry negative entries."""

from dataclasses import dataclass, field

import numpy as np

from .errors import TraceError, UnknownEventError


@dataclass(frozen=True, eq=False)
class QuasiDistribution:
    """Quasi-probability distribution over a finite product outcome space.

    Attributes
    ----------
    weights : ndarray
        Real weights; ``weights.shape`` is the per-variable cardinality.
    variables : tuple
        Variable identifiers, one per axis (default ``0 .. n-1``).
    """

    weights: np.ndarray
    variables: tuple = field(default=None)

    def __post_init__(self):
        if np.iscomplexobj(self.weights):
            raise TypeError("quasi-probabilities are real")
        w = np.array(self.weights, dtype=float)
        total = float(np.sum(w))
        if abs(total - 1.0) > 1e-12 * max(1.0, float(np.sum(np.abs(w)))):
            raise TraceError(f"weights must sum to 1, got {total!r}")
        w.flags.writeable = False
        variables = tuple(range(w.ndim)) if self.variables is None else tuple(self.variables)
        if len(variables) != w.ndim or len(set(variables)) != w.ndim:
            raise ValueError("need one unique variable name per axis")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "variables", variables)

    @property
    def shape(self):
        return self.weights.shape

    @property
    def negativity(self):
        """Sum of absolute values of the negative weights."""
        return float(-np.sum(self.weights[self.weights < 0]))

    def axis(self, variable):
        try:
            return self.variables.index(variable)
        except ValueError:
            raise UnknownEventError(variable) from None

    def __repr__(self):
        return f"QuasiDistribution(shape={self.shape}, variables={self.variables})"


def marginalize(q, keep):
    """Sum out every variable not in ``keep``; result axes follow ``keep``'s order."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one variable")
    axes = [q.axis(v) for v in keep]
    if len(set(axes)) != len(axes):
        raise ValueError(f"repeated variables in {keep}")
    drop = tuple(i for i in range(q.weights.ndim) if i not in axes)
    w = np.sum(q.weights, axis=drop)
    remaining = sorted(axes)
    w = np.transpose(w, [remaining.index(a) for a in axes])
    return QuasiDistribution(w, keep)


def to_json(q):
    return {
        "shape": list(q.shape),
        "variables": list(q.variables),
        "weights": [float(x) for x in q.weights.ravel()],
    }


def from_json(obj):
    shape = tuple(obj["shape"])
    return QuasiDistribution(np.array(obj["weights"], dtype=float).reshape(shape), obj.get("variables"))
