"""Schema registry (TBox) and load-time static analysis."""

from .analysis import (
    DepEdge,
    DepGraph,
    analyze,
    build_dependency_graph,
    check_reachability,
    check_type_safety,
    conjuncts,
    iter_refs,
)
from .registry import (
    ANY_CONCEPT,
    VIEW_MODEL,
    AnalysisReport,
    Finding,
    ModelSpec,
    PropertySpec,
    PropRules,
    RegisteredIndividual,
    RegistrationResult,
    Registry,
    Violation,
    defaults_for,
    register,
    validate_reification,
)

__all__ = [
    "Registry",
    "RegistrationResult",
    "RegisteredIndividual",
    "ModelSpec",
    "PropertySpec",
    "PropRules",
    "AnalysisReport",
    "Finding",
    "Violation",
    "register",
    "validate_reification",
    "defaults_for",
    "analyze",
    "build_dependency_graph",
    "check_reachability",
    "check_type_safety",
    "iter_refs",
    "conjuncts",
    "DepGraph",
    "DepEdge",
    "ANY_CONCEPT",
    "VIEW_MODEL",
]
