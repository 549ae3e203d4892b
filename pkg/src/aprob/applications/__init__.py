"""Worked encodings of heuristic knowledge as probability distributions."""
from .analogy import AnalogyScore, analogy_score
from .clustering import ClusterCoding, coding_bits, mdl_cluster
from .expr_induction import ExampleTriple, InducedProgram, induce_by_operator, induce_expr, parse_triple
from .planner import PlannerSpec, planner_stream

__all__ = [
    "AnalogyScore", "analogy_score",
    "ClusterCoding", "coding_bits", "mdl_cluster",
    "ExampleTriple", "InducedProgram", "induce_by_operator", "induce_expr", "parse_triple",
    "PlannerSpec", "planner_stream",
]
