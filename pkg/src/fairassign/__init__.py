"""Diversity-aware assignment of candidates to open positions in an organisational network."""

from .errors import FairAssignError, Infeasible, InstanceError
from .evaluation import evaluate, exact_oracle, fit_bounds, hungarian_baseline, random_baseline
from .fairea import FairEAConfig, Threshold, fairea_assign
from .netcore import AttributedGraph, Position, graph_assortativity
from .problem import AssignmentInstance, Candidate

__all__ = [
    "AssignmentInstance",
    "AttributedGraph",
    "Candidate",
    "FairAssignError",
    "FairEAConfig",
    "Infeasible",
    "InstanceError",
    "Position",
    "Threshold",
    "evaluate",
    "exact_oracle",
    "fairea_assign",
    "fit_bounds",
    "graph_assortativity",
    "hungarian_baseline",
    "random_baseline",
]
