"""Pseudo-density operators: construction, marginal problems, entropies and pseudo-channels."""

from . import errors, kernels
from .channel import PseudoChannel
from .circuit import CircuitSpec, Event, Interval, build_pdo
from .marginal import MarginalScenario, SolutionFamily, solve_herm1
from .maxent import MaxEntProblem, infer
from .pdo import Pdo, from_matrix, maximally_mixed, partial_trace, tensor_product
from .quasi import QuasiDistribution

__version__ = "0.1.0"

__all__ = [
    "CircuitSpec",
    "Event",
    "Interval",
    "MarginalScenario",
    "MaxEntProblem",
    "Pdo",
    "PseudoChannel",
    "QuasiDistribution",
    "SolutionFamily",
    "build_pdo",
    "errors",
    "from_matrix",
    "infer",
    "kernels",
    "maximally_mixed",
    "partial_trace",
    "solve_herm1",
    "tensor_product",
]
