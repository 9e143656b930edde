"""Quantum-walk link prediction with classical baselines and a ranking harness."""

__version__ = "0.1.0"

from .graph import (
    Graph,
    SplitSet,
    TransitionOperator,
    build_transition_operator,
    load_edge_list,
    merge_validation_edges,
)
from .walk import WalkConfig, evolve, init_state, score_batch, score_pair

__all__ = [
    "Graph",
    "SplitSet",
    "TransitionOperator",
    "WalkConfig",
    "build_transition_operator",
    "evolve",
    "init_state",
    "load_edge_list",
    "merge_validation_edges",
    "score_batch",
    "score_pair",
    "__version__",
]
