"""Exact replay of the isolation argument that the drives generate su(6J+7)."""
from .graph import STEP_TAGS, IsolatedSet, ProvenanceError, TransitionGraph, export_graph
from .steps import (
    ProofFailure,
    ProofReport,
    StepRecord,
    connect_and_span,
    double_commutator,
    induction_isolate,
    printed_group,
    split_z_pairs,
    step3_groups,
    verify_proof,
)
from .vandermonde import (
    StructuralFailure,
    VandermondeResult,
    ladder_nodes,
    modular_determinant,
    vandermonde_determinant,
    vandermonde_isolate,
    vandermonde_soundness,
)

__all__ = [
    "STEP_TAGS",
    "IsolatedSet",
    "ProvenanceError",
    "TransitionGraph",
    "export_graph",
    "ProofFailure",
    "ProofReport",
    "StepRecord",
    "connect_and_span",
    "double_commutator",
    "induction_isolate",
    "printed_group",
    "split_z_pairs",
    "step3_groups",
    "verify_proof",
    "StructuralFailure",
    "VandermondeResult",
    "ladder_nodes",
    "modular_determinant",
    "vandermonde_determinant",
    "vandermonde_isolate",
    "vandermonde_soundness",
]
