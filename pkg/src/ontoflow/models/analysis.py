"""Load-time static analysis over a registry.

Three passes, all purely syntactic over declared expressions:

* dependency graph — who can produce the events a condition/derivation
  reads (producer -> consumer edges);
* reachability — warn about condition terms demanding a property value
  that nothing in the loaded ontology can ever produce;
* type safety — every property reference must resolve against its
  enclosing model, navigation must go through relations whose range
  declares the target property, and numeric coercion/ordering must land
  on numeric-ish operands.

Error codes are stable for CI: EO-TYPE, EO-UNREACHABLE (plus the
registration codes EO-UNKNOWN-PROP, EO-RANGE, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..bsl.nodes import (
    Binary,
    BinOp,
    ContextRef,
    DataType,
    Deref,
    Expression,
    Literal,
    NumCoerce,
    PropertyKind,
    PropRef,
    SetDoAction,
)
from ..bsl.printer import expr_text
from ..scalars import parse_number
from .registry import (
    ANY_CONCEPT,
    AnalysisReport,
    Finding,
    ModelSpec,
    PropRules,
    Registry,
)

Node = tuple[str, str]  # (model name, property name)


@dataclass(frozen=True)
class DepEdge:
    producer: Node
    consumer: Node
    via: str  # property whose events flow along this edge


@dataclass
class DepGraph:
    nodes: set[Node] = field(default_factory=set)
    edges: set[DepEdge] = field(default_factory=set)

    def consumers_of(self, node: Node) -> set[Node]:
        return {e.consumer for e in self.edges if e.producer == node}


# -- reference extraction ------------------------------------------------------


def iter_refs(expr: Expression) -> Iterator[tuple[str, Optional[str]]]:
    """Yield (property, via_relation) references; via_relation is None for
    ``$.p`` and the relation name for ``$($.rel).p`` (the relation itself
    is also yielded as a direct reference)."""
    if isinstance(expr, PropRef):
        yield (expr.name, None)
    elif isinstance(expr, Deref):
        yield (expr.relation, None)
        yield (expr.prop, expr.relation)
    elif isinstance(expr, NumCoerce):
        yield from iter_refs(expr.operand)
    elif isinstance(expr, Binary):
        yield from iter_refs(expr.lhs)
        yield from iter_refs(expr.rhs)
    # Literal / ContextRef reference nothing


def conjuncts(expr: Expression) -> Iterator[Expression]:
    """Top-level && terms of a condition."""
    if isinstance(expr, Binary) and expr.op is BinOp.AND:
        yield from conjuncts(expr.lhs)
        yield from conjuncts(expr.rhs)
    else:
        yield expr


def _model_exprs(rules: PropRules) -> Iterator[tuple[str, Expression]]:
    if rules.condition is not None:
        yield ("Condition", rules.condition)
    if rules.setvalue is not None:
        yield ("SetValue", rules.setvalue)


# -- producers ------------------------------------------------------------------


def _producers(registry: Registry) -> dict[tuple[str, str], list[Node]]:
    """(concept, property) -> model nodes that can emit such value events."""
    out: dict[tuple[str, str], list[Node]] = {}

    def add(concept: str, prop: str, node: Node) -> None:
        out.setdefault((concept, prop), []).append(node)

    for spec in registry.models.values():
        for pname, rules in spec.flat.items():
            if rules.setvalue is not None:
                add(spec.concept, pname, (spec.name, pname))
            for action in rules.setdo:
                concept = _target_concept(registry, spec, action)
                if concept is None:
                    continue
                for assigned, _ in action.assignments:
                    add(concept, assigned, (spec.name, pname))
    return out


def _target_concept(registry: Registry, spec: ModelSpec, action: SetDoAction) -> Optional[str]:
    if isinstance(action.target, ContextRef):
        return spec.concept
    if isinstance(action.target, PropRef):
        pspec = registry.properties.get(action.target.name)
        if pspec is not None and pspec.kind is PropertyKind.RELATION:
            return pspec.range_concept
    return None


def _ref_concept(registry: Registry, spec: ModelSpec, via: Optional[str]) -> Optional[str]:
    """Concept a reference resolves against: the model's own concept for
    ``$.p``, the relation's range for navigated references."""
    if via is None:
        return spec.concept
    pspec = registry.properties.get(via)
    if pspec is None or pspec.kind is not PropertyKind.RELATION:
        return None
    return pspec.range_concept


# -- dependency graph ------------------------------------------------------------


def build_dependency_graph(registry: Registry) -> DepGraph:
    """Producer -> consumer edges for every syntactic reference."""
    graph = DepGraph()
    producers = _producers(registry)
    for spec in registry.models.values():
        for pname, rules in spec.flat.items():
            graph.nodes.add((spec.name, pname))
    for spec in registry.models.values():
        for pname, rules in spec.flat.items():
            consumer = (spec.name, pname)
            for _, expr in _model_exprs(rules):
                for prop, via in iter_refs(expr):
                    concept = _ref_concept(registry, spec, via)
                    if concept is None:
                        continue
                    for producer in producers.get((concept, prop), ()):
                        graph.edges.add(DepEdge(producer, consumer, prop))
    return graph


# -- reachability ------------------------------------------------------------------


def check_reachability(registry: Registry, dep_graph: Optional[DepGraph] = None) -> list[Finding]:
    """Warn for every condition/derivation term that demands a property
    nothing can produce: no SetValue or SetDo emits it, no registered
    individual initializes it, no Default materializes it, and it is not
    actor-editable (a plain declared property of some model that has at
    least one individual to edit)."""
    del dep_graph  # edge set is recomputed from the same walk
    producers = _producers(registry)
    findings: list[Finding] = []

    models_with_individuals = set()
    initialized: set[tuple[str, str]] = set()
    for rec in registry.individuals.values():
        models_with_individuals.update(rec.models)
        for prop in rec.initialized:
            initialized.add((rec.concept, prop))

    def producible(concept: str, prop: str) -> bool:
        if (concept, prop) in producers:
            return True
        if (concept, prop) in initialized:
            return True
        for spec in registry.models_for_concept(concept):
            rules = spec.flat.get(prop)
            if rules is None:
                continue
            if rules.has_default:
                return True
            if rules.condition is not None and rules.setvalue is None:
                # an action: actors can trigger it
                if spec.name in models_with_individuals:
                    return True
            if rules.setvalue is None and spec.name in models_with_individuals:
                # plain declared property: externally writable
                return True
        return False

    for spec in registry.models.values():
        for pname, rules in spec.flat.items():
            for ctx, expr in _model_exprs(rules):
                for term in conjuncts(expr):
                    for prop, via in iter_refs(term):
                        concept = _ref_concept(registry, spec, via)
                        if concept is None or concept == ANY_CONCEPT:
                            continue
                        if not producible(concept, prop):
                            findings.append(
                                Finding(
                                    "EO-UNREACHABLE",
                                    f"{spec.name}/{pname}/{ctx}",
                                    f"term `{expr_text(term)}` requires {prop!r} on "
                                    f"{concept}, but no event can produce it",
                                )
                            )
    return findings


# -- type safety ---------------------------------------------------------------------


def check_type_safety(registry: Registry) -> list[Finding]:
    findings: list[Finding] = []

    def err(loc: str, message: str) -> None:
        findings.append(Finding("EO-TYPE", loc, message))

    def prop_data_type(name: str) -> Optional[DataType]:
        pspec = registry.properties.get(name)
        return pspec.data_type if pspec else None

    def resolve_ref(spec: ModelSpec, loc: str, expr) -> Optional[str]:
        """Check one PropRef/Deref; returns the referenced property name on
        success (for operand typing)."""
        if isinstance(expr, PropRef):
            if expr.name not in spec.flat:
                err(loc, f"$.{expr.name} is not a property of {spec.name}")
                return None
            return expr.name
        rel = registry.properties.get(expr.relation)
        if expr.relation not in spec.flat:
            err(loc, f"$.{expr.relation} is not a property of {spec.name}")
            return None
        if rel is None or rel.kind is not PropertyKind.RELATION:
            err(loc, f"$.{expr.relation} is not a relation and cannot be navigated")
            return None
        if rel.range_concept == ANY_CONCEPT:
            return expr.prop  # unconstrained range: nothing to verify
        declared = any(
            expr.prop in m.flat for m in registry.models_for_concept(rel.range_concept)
        )
        if not declared:
            err(
                loc,
                f"$($.{expr.relation}).{expr.prop}: no {rel.range_concept} model "
                f"declares {expr.prop!r}",
            )
            return None
        return expr.prop

    def numericish(spec: ModelSpec, loc: str, expr) -> bool:
        """True when the operand can participate in numeric comparison."""
        if isinstance(expr, Literal):
            if isinstance(expr.value, str) and parse_number(expr.value) is None:
                return False
            return True
        if isinstance(expr, NumCoerce):
            return True
        if isinstance(expr, ContextRef):
            return True
        if isinstance(expr, (PropRef, Deref)):
            name = expr.name if isinstance(expr, PropRef) else expr.prop
            pspec = registry.properties.get(name)
            if pspec is None:
                return True  # unresolved: reported by resolve_ref already
            if pspec.kind is PropertyKind.RELATION:
                return False
            return pspec.data_type in (DataType.NUMERIC, DataType.BOOLEAN)
        if isinstance(expr, Binary):
            return True  # comparisons/booleans are 0/1
        return False

    def walk(spec: ModelSpec, loc: str, expr: Expression) -> None:
        if isinstance(expr, (PropRef, Deref)):
            resolve_ref(spec, loc, expr)
            return
        if isinstance(expr, NumCoerce):
            inner = expr.operand
            if isinstance(inner, (PropRef, Deref)):
                name = resolve_ref(spec, loc, inner)
                if name is not None:
                    pspec = registry.properties.get(name)
                    if pspec is not None and pspec.kind is PropertyKind.RELATION:
                        err(loc, f"cannot coerce relation {name!r} to a number")
                    elif pspec is not None and pspec.data_type is DataType.STRING:
                        err(loc, f"cannot coerce String attribute {name!r} to a number")
                return
            if isinstance(inner, Literal) and isinstance(inner.value, str):
                if parse_number(inner.value) is None:
                    err(loc, f"cannot coerce literal {inner.value!r} to a number")
                return
            walk(spec, loc, inner)
            return
        if isinstance(expr, Binary):
            walk(spec, loc, expr.lhs)
            walk(spec, loc, expr.rhs)
            if expr.op in (BinOp.LT, BinOp.GT, BinOp.GE):
                for side in (expr.lhs, expr.rhs):
                    if not numericish(spec, loc, side):
                        err(
                            loc,
                            f"ordering comparison on non-numeric operand "
                            f"`{expr_text(side)}`",
                        )
            return
        # Literal / ContextRef: nothing to check

    for spec in registry.models.values():
        for pname, rules in spec.flat.items():
            if rules.condition is not None:
                walk(spec, f"{spec.name}/{pname}/Condition", rules.condition)
            if rules.setvalue is not None:
                walk(spec, f"{spec.name}/{pname}/SetValue", rules.setvalue)
            for action in rules.setdo:
                loc = f"{spec.name}/{pname}/SetDo"
                walk(spec, loc, action.guard)
                target_concept: Optional[str] = None
                if isinstance(action.target, ContextRef):
                    target_concept = spec.concept
                elif isinstance(action.target, PropRef):
                    rel = registry.properties.get(action.target.name)
                    if action.target.name not in spec.flat:
                        err(loc, f"target $.{action.target.name} is not a property of {spec.name}")
                    elif rel is None or rel.kind is not PropertyKind.RELATION:
                        err(loc, f"target $.{action.target.name} is not a relation")
                    else:
                        target_concept = rel.range_concept
                else:
                    err(loc, "target must be $CurrentIndividual or a $.relation")
                if target_concept is None or target_concept == ANY_CONCEPT:
                    continue
                target_models = registry.models_for_concept(target_concept)
                for assigned, value in action.assignments:
                    holder = next(
                        (m for m in target_models if assigned in m.flat), None
                    )
                    if holder is None:
                        err(
                            loc,
                            f"assigns {assigned!r} which no {target_concept} model declares",
                        )
                        continue
                    pspec = registry.properties.get(assigned)
                    if pspec is None:
                        continue
                    if pspec.kind is PropertyKind.RELATION:
                        ok = isinstance(value, str)
                    elif pspec.data_type is DataType.NUMERIC:
                        ok = isinstance(value, (int, float))
                    elif pspec.data_type is DataType.BOOLEAN:
                        ok = value in (0, 1)
                    else:
                        ok = isinstance(value, str)
                    if not ok:
                        err(loc, f"assignment {assigned!r} := {value!r} does not fit its type")
    return findings


def analyze(registry: Registry) -> AnalysisReport:
    """Full static pass: type errors plus reachability warnings."""
    report = AnalysisReport()
    report.errors.extend(check_type_safety(registry))
    report.warnings.extend(check_reachability(registry, build_dependency_graph(registry)))
    return report
