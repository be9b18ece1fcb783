"""BSL front end: lexer, parser, and pretty printer."""

from .lexer import Token, TokenType, tokenize
from .nodes import (
    Assignment,
    Binary,
    BinOp,
    ConceptDecl,
    ContextRef,
    DataType,
    Declaration,
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
from .parser import parse_document, parse_expression, parse_setdo
from .printer import expr_text, pretty_print

__all__ = [
    "Token",
    "TokenType",
    "tokenize",
    "parse_document",
    "parse_expression",
    "parse_setdo",
    "pretty_print",
    "expr_text",
    "Document",
    "Declaration",
    "ConceptDecl",
    "PropertyDecl",
    "ModelDecl",
    "IndividualDecl",
    "PropertyUse",
    "Assignment",
    "Restriction",
    "RestrictionKind",
    "SetDoAction",
    "Expression",
    "Literal",
    "PropRef",
    "ContextRef",
    "NumCoerce",
    "Deref",
    "Binary",
    "BinOp",
    "PropertyKind",
    "DataType",
]
