"""AST node types for BSL documents.

Expression nodes are frozen (hashable, structurally comparable); they key
compiled-program caches downstream. Declaration nodes use lists and compare
structurally, which is what the parse/print round-trip tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from ..scalars import Scalar

# --- expressions -----------------------------------------------------------


class BinOp(str, Enum):
    EQ = "=="      # coercing equality
    SEQ = "==="    # strict (canonical-form) equality
    LT = "<"
    GT = ">"
    GE = ">="
    AND = "&&"
    OR = "||"


@dataclass(frozen=True)
class Literal:
    value: Scalar


@dataclass(frozen=True)
class PropRef:
    """``$.name`` — a property of the individual under evaluation."""

    name: str


@dataclass(frozen=True)
class ContextRef:
    """``$Value`` or ``$CurrentIndividual``."""

    name: str


@dataclass(frozen=True)
class NumCoerce:
    """Unary ``+`` — force the operand to be read numerically."""

    operand: "Expression"


@dataclass(frozen=True)
class Deref:
    """``$($.relation).prop`` — one navigation hop through a relation."""

    relation: str
    prop: str


@dataclass(frozen=True)
class Binary:
    op: BinOp
    lhs: "Expression"
    rhs: "Expression"


Expression = Union[Literal, PropRef, ContextRef, NumCoerce, Deref, Binary]


# --- restrictions and actions ----------------------------------------------


class RestrictionKind(str, Enum):
    CONDITION = "Condition"
    SET_VALUE = "SetValue"
    SET_DO = "SetDo"
    DEFAULT = "Default"
    MULTIPLE = "Multiple"
    REQUIRED = "Required"
    UNSUPPORTED = "Unsupported"


@dataclass
class SetDoAction:
    """One guarded system act: EditIndividual on a target with assignments."""

    act: str                                  # always "EditIndividual"
    target: Expression                        # $CurrentIndividual or $.relation
    guard: Expression                         # the $Condition entry
    assignments: list[tuple[str, Scalar]]     # property -> literal, in source order


@dataclass
class Restriction:
    kind: RestrictionKind
    expr: Optional[Expression] = None          # Condition / SetValue
    actions: list[SetDoAction] = field(default_factory=list)  # SetDo
    value: Scalar = None                       # Default
    flag: bool = False                         # Multiple / Required
    raw: str = ""                              # Unsupported: original keyword payload
    keyword: str = ""                          # Unsupported: original keyword


# --- declarations ----------------------------------------------------------


class PropertyKind(str, Enum):
    ATTRIBUTE = "Attribute"
    RELATION = "Relation"


class DataType(str, Enum):
    NUMERIC = "Numeric"
    BOOLEAN = "Boolean"
    STRING = "String"


@dataclass
class ConceptDecl:
    name: str


@dataclass
class PropertyDecl:
    kind: PropertyKind
    name: str
    data_type: Optional[DataType] = None       # attributes only
    range_concept: Optional[str] = None        # relations only


@dataclass
class PropertyUse:
    name: str
    kind: Optional[PropertyKind] = None        # echoed kind, when written
    restrictions: list[Restriction] = field(default_factory=list)
    nested: list["PropertyUse"] = field(default_factory=list)


@dataclass
class ModelDecl:
    concept: str
    name: str
    properties: list[PropertyUse] = field(default_factory=list)


@dataclass
class Assignment:
    prop: str
    value: Scalar
    children: list["Assignment"] = field(default_factory=list)


@dataclass
class IndividualDecl:
    concept: str
    name: str
    models: list[str] = field(default_factory=list)           # SetModel lines
    assignments: list[Assignment] = field(default_factory=list)


Declaration = Union[ConceptDecl, PropertyDecl, ModelDecl, IndividualDecl]


@dataclass
class Document:
    declarations: list[Declaration] = field(default_factory=list)

    def concepts(self) -> list[ConceptDecl]:
        return [d for d in self.declarations if isinstance(d, ConceptDecl)]

    def property_decls(self) -> list[PropertyDecl]:
        return [d for d in self.declarations if isinstance(d, PropertyDecl)]

    def models(self) -> list[ModelDecl]:
        return [d for d in self.declarations if isinstance(d, ModelDecl)]

    def individuals(self) -> list[IndividualDecl]:
        return [d for d in self.declarations if isinstance(d, IndividualDecl)]
