"""Canonical text rendering for BSL documents.

``parse_document(pretty_print(doc))`` is structurally equal to ``doc`` for
any document produced by the parser; that round trip is the contract. The
renderer normalizes cosmetics: one canonical spelling per navigation form
(``$($.rel).prop``), ``'$do'`` for the act key, wrapped payloads joined to
one line.
"""

from __future__ import annotations

import re

from ..scalars import Scalar, canonical
from .nodes import (
    Assignment,
    Binary,
    BinOp,
    ConceptDecl,
    ContextRef,
    Deref,
    Document,
    Expression,
    IndividualDecl,
    Literal,
    ModelDecl,
    NumCoerce,
    PropertyDecl,
    PropertyKind,
    PropertyUse,
    PropRef,
    Restriction,
    RestrictionKind,
    SetDoAction,
)

_PRECEDENCE = {
    BinOp.OR: 1,
    BinOp.AND: 2,
    BinOp.EQ: 3,
    BinOp.SEQ: 3,
    BinOp.LT: 3,
    BinOp.GT: 3,
    BinOp.GE: 3,
}

_BARE_NAME_OK = re.compile(r"^[A-Za-z_]\w*(?: [A-Za-z_]\w*)*$")


def pretty_print(doc: Document) -> str:
    """Render a Document back to canonical BSL text."""
    chunks = [_declaration(d) for d in doc.declarations]
    return "\n".join(chunks) + "\n" if chunks else ""


def expr_text(expr: Expression, parent_prec: int = 0) -> str:
    """Render an expression; used by the printer and by analysis messages."""
    if isinstance(expr, Literal):
        return _scalar(expr.value, prefer_quotes=isinstance(expr.value, str))
    if isinstance(expr, PropRef):
        return f"$.{expr.name}"
    if isinstance(expr, ContextRef):
        return f"${expr.name}"
    if isinstance(expr, NumCoerce):
        return f"+{expr_text(expr.operand, 4)}"
    if isinstance(expr, Deref):
        return f"$($.{expr.relation}).{expr.prop}"
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        text = (
            f"{expr_text(expr.lhs, prec)} {expr.op.value} "
            f"{expr_text(expr.rhs, prec + 1)}"
        )
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"not an expression node: {expr!r}")


def _scalar(value: Scalar, prefer_quotes: bool = False) -> str:
    if isinstance(value, str):
        if prefer_quotes or not _BARE_NAME_OK.match(value):
            return '"' + value + '"'
        return value
    return canonical(value)


def _declaration(d) -> str:
    if isinstance(d, ConceptDecl):
        return f"Concept: Instance: {d.name}"
    if isinstance(d, PropertyDecl):
        lines = [f"{d.kind.value}: Individual: {d.name}"]
        if d.kind is PropertyKind.ATTRIBUTE:
            lines.append(f": DataType: {d.data_type.value}")
        else:
            lines.append(f": Range: {d.range_concept}")
        return "\n".join(lines)
    if isinstance(d, ModelDecl):
        lines = [f"{d.concept}: Model: {d.name}"]
        for pu in d.properties:
            _property_use(pu, 1, lines)
        return "\n".join(lines)
    if isinstance(d, IndividualDecl):
        lines = [f"{d.concept}: Individual: {d.name}"]
        for m in d.models:
            lines.append(f": SetModel: {m}")
        for a in d.assignments:
            _assignment(a, 1, lines)
        return "\n".join(lines)
    raise TypeError(f"not a declaration node: {d!r}")


def _property_use(pu: PropertyUse, depth: int, lines: list[str]) -> None:
    colons = ":" * depth
    if pu.kind is None:
        lines.append(f"{colons} {pu.name}")
    else:
        lines.append(f"{colons} {pu.kind.value}: {pu.name}")
    for r in pu.restrictions:
        lines.append(_restriction(r, depth + 1))
    for child in pu.nested:
        _property_use(child, depth + 1, lines)


def _restriction(r: Restriction, depth: int) -> str:
    colons = ":" * depth
    if r.kind in (RestrictionKind.CONDITION, RestrictionKind.SET_VALUE):
        return f"{colons} {r.kind.value}: {expr_text(r.expr)}"
    if r.kind is RestrictionKind.SET_DO:
        rendered = " ".join(_action(a) for a in r.actions)
        return f"{colons} SetDo: {rendered}"
    if r.kind is RestrictionKind.DEFAULT:
        return f"{colons} Default: {_scalar(r.value)}"
    if r.kind in (RestrictionKind.MULTIPLE, RestrictionKind.REQUIRED):
        return f"{colons} {r.kind.value}: {1 if r.flag else 0}"
    # Unsupported: echo the original keyword and payload
    payload = f": {r.raw}" if r.raw else ":"
    return f"{colons} {r.keyword}{payload}"


def _action(a: SetDoAction) -> str:
    parts = [
        f"'$do': '{a.act}'",
        f"'$IndividualID': {expr_text(a.target)}",
        f"'$Condition': {expr_text(a.guard)}",
    ]
    for prop, value in a.assignments:
        parts.append(f"'{prop}': {_scalar(value)}")
    return "({" + ", ".join(parts) + "})"


def _assignment(a: Assignment, depth: int, lines: list[str]) -> None:
    colons = ":" * depth
    lines.append(f"{colons} {a.prop}: {_scalar(a.value)}")
    for child in a.children:
        _assignment(child, depth + 1, lines)
