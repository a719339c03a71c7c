"""Trust-filtered neighbor selection (INESH) for simulated mobile ad hoc networks."""

from .core import (CostMode, Graph, Observation, ObservationKind, Outcome, PathResult,
                   TrustTable, Verdict, build_graph, inesh_search, oracle_search, trust_filter,
                   update_trust)

__version__ = "0.1.0"

__all__ = [
    "CostMode", "Graph", "Observation", "ObservationKind", "Outcome", "PathResult",
    "TrustTable", "Verdict", "build_graph", "inesh_search", "oracle_search", "trust_filter",
    "update_trust",
]
