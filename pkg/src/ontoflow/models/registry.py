"""Schema registry: concepts, properties, models, and reification checks.

Registration is batch oriented and additive: a later document may add new
concepts/properties/models and extend existing individuals (new SetModel
attachments, further property values), but redefining a model or property
is an error — schema history only grows.

The registry itself is pure data; materializing staged individuals into
graph events is the engine's job.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..bsl.nodes import (
    Assignment,
    ConceptDecl,
    DataType,
    Document,
    Expression,
    IndividualDecl,
    ModelDecl,
    PropertyDecl,
    PropertyKind,
    PropertyUse,
    RestrictionKind,
    SetDoAction,
)
from ..scalars import Scalar

ANY_CONCEPT = "Entity"  # universal relation range

VIEW_MODEL = "Model View Individual"


@dataclass
class Finding:
    code: str
    location: str
    message: str

    def as_dict(self) -> dict:
        return {"code": self.code, "location": self.location, "message": self.message}

    def __str__(self):
        return f"{self.code} {self.location}: {self.message}"


@dataclass
class AnalysisReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, code: str, location: str, message: str) -> None:
        self.errors.append(Finding(code, location, message))

    def warn(self, code: str, location: str, message: str) -> None:
        self.warnings.append(Finding(code, location, message))

    def extend(self, other: "AnalysisReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "errors": [f.as_dict() for f in self.errors],
            "warnings": [f.as_dict() for f in self.warnings],
        }

    def render(self) -> str:
        lines = [f"ERROR   {f}" for f in self.errors]
        lines += [f"WARNING {f}" for f in self.warnings]
        lines.append(f"{len(self.errors)} error(s), {len(self.warnings)} warning(s)")
        return "\n".join(lines)


@dataclass
class Violation:
    property: str
    rule: str
    detail: str

    def __str__(self):
        return f"{self.property}: {self.rule} ({self.detail})"


@dataclass
class PropertySpec:
    name: str
    kind: PropertyKind
    data_type: Optional[DataType] = None
    range_concept: Optional[str] = None

    @property
    def numericish(self) -> bool:
        return self.data_type in (DataType.NUMERIC, DataType.BOOLEAN)


@dataclass
class PropRules:
    """Effective restrictions for one property use within a model."""

    name: str
    kind_echo: Optional[PropertyKind] = None
    condition: Optional[Expression] = None
    setvalue: Optional[Expression] = None
    setdo: list[SetDoAction] = field(default_factory=list)
    default: Scalar = None
    has_default: bool = False
    multiple: bool = False
    required: bool = False
    unsupported: list[tuple[str, str]] = field(default_factory=list)
    children: "dict[str, PropRules]" = field(default_factory=dict)

    @property
    def is_action(self) -> bool:
        """Triggerable: gated by a Condition and not derived."""
        return self.condition is not None and self.setvalue is None


@dataclass
class ModelSpec:
    name: str
    concept: str
    props: dict[str, PropRules] = field(default_factory=dict)   # top level, ordered
    flat: dict[str, PropRules] = field(default_factory=dict)    # all scopes by name
    multiple_names: set[str] = field(default_factory=set)

    def order(self) -> list[str]:
        return list(self.flat)


@dataclass
class RegisteredIndividual:
    name: str
    concept: str
    models: list[str] = field(default_factory=list)
    initialized: set[str] = field(default_factory=set)


class Registry:
    def __init__(self):
        self.concepts: dict[str, ConceptDecl] = {}
        self.properties: dict[str, PropertySpec] = {}
        self.models: dict[str, ModelSpec] = {}
        self.individuals: dict[str, RegisteredIndividual] = {}

    def copy(self) -> "Registry":
        r = Registry()
        r.concepts = dict(self.concepts)
        r.properties = dict(self.properties)
        r.models = dict(self.models)
        r.individuals = {
            k: RegisteredIndividual(v.name, v.concept, list(v.models), set(v.initialized))
            for k, v in self.individuals.items()
        }
        return r

    def models_for_concept(self, concept: str) -> list[ModelSpec]:
        return [m for m in self.models.values() if m.concept == concept]

    def multiple_props(self) -> set[str]:
        out: set[str] = set()
        for m in self.models.values():
            out |= m.multiple_names
        return out

    def rules_for(self, models: list[str], prop: str) -> list[tuple[ModelSpec, PropRules]]:
        """Every (model, rules) pair declaring `prop`, in attachment order."""
        found = []
        for name in models:
            spec = self.models.get(name)
            if spec and prop in spec.flat:
                found.append((spec, spec.flat[prop]))
        return found


@dataclass
class RegistrationResult:
    registry: Registry
    staged: list[IndividualDecl]
    new_individuals: list[str]
    report: AnalysisReport

    @property
    def ok(self) -> bool:
        return self.report.ok


def register(registry: Registry, document: Document) -> RegistrationResult:
    """Validate a parsed document against (a copy of) the registry.

    On success the returned registry includes everything from the document
    and `staged` lists the individual declarations awaiting genesis. On any
    error the original registry is untouched and `report.ok` is False.

    Individuals are admitted in two passes so a relation may point forward
    to an individual declared later in the same document.
    """
    reg = registry.copy()
    report = AnalysisReport()
    staged: list[IndividualDecl] = []
    pending: list[IndividualDecl] = []

    for decl in document.declarations:
        if isinstance(decl, ConceptDecl):
            if decl.name in reg.concepts:
                report.error("EO-DUP-CONCEPT", decl.name, "concept is already declared")
            else:
                reg.concepts[decl.name] = decl
        elif isinstance(decl, PropertyDecl):
            if decl.name in reg.properties:
                report.error("EO-DUP-PROP", decl.name, "property is already declared")
                continue
            if decl.kind is PropertyKind.RELATION and decl.range_concept not in reg.concepts:
                report.error(
                    "EO-UNKNOWN-CONCEPT",
                    decl.name,
                    f"relation range names unknown concept {decl.range_concept!r}",
                )
                continue
            reg.properties[decl.name] = PropertySpec(
                decl.name, decl.kind, decl.data_type, decl.range_concept
            )
        elif isinstance(decl, ModelDecl):
            _register_model(reg, decl, report)
        elif isinstance(decl, IndividualDecl):
            if _stage_individual(reg, decl, report):
                pending.append(decl)
        else:  # pragma: no cover - parser produces no other nodes
            report.error("EO-SYNTAX", str(decl), "unknown declaration")

    for decl in pending:
        violations = validate_reification(reg, decl)
        for v in violations:
            code = {
                "range": "EO-RANGE",
                "type": "EO-TYPE",
                "unknown-property": "EO-UNKNOWN-PROP",
                "not-in-model": "EO-UNKNOWN-PROP",
            }.get(v.rule, "EO-TYPE")
            report.error(code, f"{decl.name}/{v.property}", v.detail)
        if not violations:
            reg.individuals[decl.name].initialized |= {a.prop for a in decl.assignments}
            staged.append(decl)

    if not report.ok:
        return RegistrationResult(registry, [], [], report)
    new_individuals = [n for n in reg.individuals if n not in registry.individuals]
    return RegistrationResult(reg, staged, new_individuals, report)


def _register_model(reg: Registry, decl: ModelDecl, report: AnalysisReport) -> None:
    loc = decl.name
    if decl.concept not in reg.concepts:
        report.error("EO-UNKNOWN-CONCEPT", loc, f"model names unknown concept {decl.concept!r}")
        return
    if decl.name in reg.models:
        report.error("EO-DUP-MODEL", loc, "model is already registered")
        return
    spec = ModelSpec(decl.name, decl.concept)

    def build(uses: list[PropertyUse], scope: dict[str, PropRules]) -> None:
        for use in uses:
            ploc = f"{loc}/{use.name}"
            pspec = reg.properties.get(use.name)
            if pspec is None:
                report.error("EO-UNKNOWN-PROP", ploc, "property was never declared")
                continue
            if use.kind is not None and use.kind is not pspec.kind:
                report.error(
                    "EO-TYPE", ploc, f"declared as {pspec.kind.value}, used as {use.kind.value}"
                )
            if use.name in scope:
                report.error("EO-DUP-PROP", ploc, "property used twice in the same scope")
                continue
            rules = PropRules(use.name, use.kind)
            for r in use.restrictions:
                if r.kind is RestrictionKind.CONDITION:
                    rules.condition = r.expr
                elif r.kind is RestrictionKind.SET_VALUE:
                    rules.setvalue = r.expr
                elif r.kind is RestrictionKind.SET_DO:
                    rules.setdo.extend(r.actions)
                elif r.kind is RestrictionKind.DEFAULT:
                    rules.default = r.value
                    rules.has_default = True
                    if not _value_matches(pspec, r.value, reg):
                        report.error(
                            "EO-TYPE", ploc, f"default {r.value!r} does not fit {pspec.data_type}"
                        )
                elif r.kind is RestrictionKind.MULTIPLE:
                    rules.multiple = r.flag
                elif r.kind is RestrictionKind.REQUIRED:
                    rules.required = r.flag
                else:
                    rules.unsupported.append((r.keyword, r.raw))
                    report.warn(
                        "EO-UNSUPPORTED", ploc, f"restriction {r.keyword!r} is not interpreted"
                    )
            scope[use.name] = rules
            if use.name not in spec.flat:
                spec.flat[use.name] = rules
            if rules.multiple:
                spec.multiple_names.add(use.name)
            if use.nested:
                build(use.nested, rules.children)

    build(decl.properties, spec.props)
    reg.models[decl.name] = spec


def _stage_individual(reg: Registry, decl: IndividualDecl, report: AnalysisReport) -> bool:
    """Admit the individual's identity and model attachments (pass one)."""
    loc = decl.name
    if decl.concept not in reg.concepts:
        report.error("EO-UNKNOWN-CONCEPT", loc, f"unknown concept {decl.concept!r}")
        return False
    existing = reg.individuals.get(decl.name)
    if existing is not None and existing.concept != decl.concept:
        report.error(
            "EO-TYPE",
            loc,
            f"individual already exists with concept {existing.concept!r}",
        )
        return False
    prior_models = list(existing.models) if existing else []
    for m in decl.models:
        spec = reg.models.get(m)
        if spec is None:
            report.error("EO-UNKNOWN-MODEL", loc, f"SetModel names unknown model {m!r}")
            return False
        if spec.concept != decl.concept:
            report.error(
                "EO-TYPE", loc, f"model {m!r} belongs to concept {spec.concept!r}"
            )
            return False
        if m in prior_models:
            report.error("EO-DUP-MODEL", loc, f"model {m!r} is already attached")
            return False
    if existing is None and not decl.models:
        report.error("EO-UNKNOWN-MODEL", loc, "new individual carries no SetModel")
        return False
    if existing is None:
        reg.individuals[decl.name] = RegisteredIndividual(
            decl.name, decl.concept, list(decl.models)
        )
    else:
        existing.models.extend(decl.models)
    return True


def validate_reification(registry: Registry, draft: IndividualDecl) -> list[Violation]:
    """Check one individual declaration against its models' restrictions.

    Pure: the outcome depends only on (registry, draft). An empty list
    means the reification is admissible; defaults still to be materialized
    are reported by `defaults_for`.
    """
    violations: list[Violation] = []
    existing = registry.individuals.get(draft.name)
    models = list(existing.models) if existing else []
    for m in draft.models:
        if m not in models:
            models.append(m)
    flat: dict[str, PropRules] = {}
    multiple: set[str] = set()
    for name in models:
        spec = registry.models.get(name)
        if spec is None:
            violations.append(Violation("SetModel", "unknown-model", f"unknown model {name!r}"))
            continue
        for pname, rules in spec.flat.items():
            flat.setdefault(pname, rules)
        multiple |= spec.multiple_names

    assigned: dict[str, int] = {}

    def check(a: Assignment) -> None:
        pspec = registry.properties.get(a.prop)
        if pspec is None:
            violations.append(Violation(a.prop, "unknown-property", "property was never declared"))
            return
        if a.prop not in flat:
            violations.append(
                Violation(a.prop, "not-in-model", f"no attached model declares {a.prop!r}")
            )
            return
        derived = any(
            spec.flat[a.prop].setvalue is not None
            for spec in (registry.models[m] for m in models if m in registry.models)
            if a.prop in spec.flat
        )
        if derived:
            violations.append(
                Violation(a.prop, "derived", "derived properties cannot be initialized")
            )
            return
        if not _value_matches(pspec, a.value, registry):
            rule = "range" if pspec.kind is PropertyKind.RELATION else "type"
            expected = (
                pspec.range_concept if pspec.kind is PropertyKind.RELATION else pspec.data_type
            )
            violations.append(
                Violation(a.prop, rule, f"value {a.value!r} does not fit {expected}")
            )
        if a.prop == "ViewMode" and a.value != "showcase":
            violations.append(
                Violation(a.prop, "view-mode", f"unsupported ViewMode {a.value!r}")
            )
        for child in a.children:
            check(child)

    for a in draft.assignments:
        assigned[a.prop] = assigned.get(a.prop, 0) + 1
        check(a)

    for prop, count in assigned.items():
        if count > 1 and prop not in multiple:
            violations.append(
                Violation(prop, "multiple", "property is single-valued but assigned twice")
            )

    already = existing.initialized if existing else set()
    for name in models:
        spec = registry.models.get(name)
        if spec is None:
            continue
        for pname, rules in spec.flat.items():
            if rules.required and pname not in assigned and pname not in already and not rules.has_default:
                violations.append(
                    Violation(pname, "required", "required property is missing and has no Default")
                )
    return violations


def defaults_for(registry: Registry, draft: IndividualDecl) -> list[tuple[str, Scalar, str]]:
    """(property, value, model) defaults to materialize for this draft."""
    assigned = {a.prop for a in draft.assignments}
    existing = registry.individuals.get(draft.name)
    already = existing.initialized if existing else set()
    out = []
    seen = set()
    for name in draft.models:
        spec = registry.models.get(name)
        if spec is None:
            continue
        for pname, rules in spec.flat.items():
            if rules.has_default and pname not in assigned and pname not in already and pname not in seen:
                out.append((pname, rules.default, name))
                seen.add(pname)
    return out


def _value_matches(pspec: PropertySpec, value: Scalar, registry: Registry) -> bool:
    if pspec.kind is PropertyKind.RELATION:
        if not isinstance(value, str):
            return False
        target = registry.individuals.get(value)
        if target is None:
            return False
        return pspec.range_concept == ANY_CONCEPT or target.concept == pspec.range_concept
    if pspec.data_type is DataType.NUMERIC:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if pspec.data_type is DataType.BOOLEAN:
        return isinstance(value, (int, float)) and value in (0, 1)
    if pspec.data_type is DataType.STRING:
        return isinstance(value, str)
    return False
