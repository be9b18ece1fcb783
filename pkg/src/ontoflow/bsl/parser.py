"""Recursive-descent parser for BSL documents.

The grammar is line oriented. A document is a sequence of declarations;
each declaration header has the shape ``A: B: C`` and the second segment
disambiguates it:

    Concept: Instance: <name>
    Attribute|Relation: Individual: <name>      (+ ': DataType:' / ': Range:')
    <Concept>: Model: <name>                    (+ property-use body)
    <Concept>: Individual: <name>               (+ SetModel / assignment body)

Body lines start with a colon run whose length is the nesting depth.
Restriction payloads (Condition/SetValue/SetDo) may continue onto the
immediately following lines: either the payload line ends in a dangling
operator, or the continuation line starts with one (``&& $.hasWood == 0``),
or the payload is inside an open paren/brace group. A blank or comment
line breaks the continuation.

The first error aborts parsing; there is no recovery.
"""

from __future__ import annotations

from typing import Optional

from ..errors import ExprParseError, LexError, ParseError, SetDoParseError
from ..scalars import Scalar
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

_RESTRICTION_KEYWORDS = {
    "Condition": RestrictionKind.CONDITION,
    "SetValue": RestrictionKind.SET_VALUE,
    "SetDo": RestrictionKind.SET_DO,
    "Default": RestrictionKind.DEFAULT,
    "Multiple": RestrictionKind.MULTIPLE,
    "Required": RestrictionKind.REQUIRED,
}

_CONTEXT_VARS = ("Value", "CurrentIndividual")

_CMP_OPS = {
    TokenType.EQ: BinOp.EQ,
    TokenType.SEQ: BinOp.SEQ,
    TokenType.LT: BinOp.LT,
    TokenType.GT: BinOp.GT,
    TokenType.GE: BinOp.GE,
}

_CONTINUATION_OPS = frozenset(
    {TokenType.AND, TokenType.OR} | set(_CMP_OPS)
)


def parse_document(source: str) -> Document:
    """Parse full BSL source into a Document. Raises ParseError/LexError."""
    return _Parser(tokenize(source), source).document()


def parse_expression(text: str) -> Expression:
    """Parse a standalone condition/derivation expression."""
    try:
        tokens = tokenize(text)
        p = _Parser(tokens, text)
        expr = p.expression()
        p.skip_newlines()
        tok = p.cur()
        if tok is not None:
            raise ExprParseError("trailing input after expression", tok.line, tok.column)
        return expr
    except ExprParseError:
        raise
    except (LexError, ParseError) as exc:
        raise ExprParseError(str(exc)) from exc


def parse_setdo(text: str) -> list[SetDoAction]:
    """Parse one or more brace-delimited action objects."""
    try:
        tokens = tokenize(text)
        p = _Parser(tokens, text)
        actions = p.setdo_actions()
        p.skip_newlines()
        tok = p.cur()
        if tok is not None:
            raise SetDoParseError("trailing input after action objects", tok.line, tok.column)
        return actions
    except SetDoParseError:
        raise
    except (LexError, ParseError) as exc:
        raise SetDoParseError(str(exc)) from exc


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.toks = tokens
        self.i = 0
        self.lines = source.splitlines()
        self._group = 0  # open paren/brace depth: newlines are soft inside

    # -- token navigation ---------------------------------------------------

    def cur(self, k: int = 0) -> Optional[Token]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def at(self, tt: TokenType, k: int = 0) -> bool:
        tok = self.cur(k)
        return tok is not None and tok.type is tt

    def advance(self) -> Token:
        tok = self.cur()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, tt: TokenType, what: str) -> Token:
        tok = self.cur()
        if tok is None:
            raise ParseError(f"unexpected end of input, expected {what}")
        if tok.type is not tt:
            raise ParseError(
                f"unexpected {tok.type.name} {tok.value!r}, expected {what}",
                tok.line,
                tok.column,
                expected=(what,),
            )
        return self.advance()

    def expect_colon(self) -> None:
        tok = self.expect(TokenType.COLONS, "':'")
        if tok.value != 1:
            raise ParseError("expected a single ':' here", tok.line, tok.column)

    def end_line(self) -> None:
        tok = self.cur()
        if tok is None:
            return
        if tok.type is not TokenType.NEWLINE:
            raise ParseError(
                f"unexpected {tok.type.name} {tok.value!r} at end of line",
                tok.line,
                tok.column,
            )
        self.advance()

    def skip_newlines(self) -> None:
        while self.at(TokenType.NEWLINE):
            self.advance()

    # -- document structure ---------------------------------------------------

    def document(self) -> Document:
        decls: list[Declaration] = []
        self.skip_newlines()
        while (tok := self.cur()) is not None:
            if tok.type is TokenType.COLONS:
                raise ParseError(
                    "property line outside of a declaration", tok.line, tok.column
                )
            decls.append(self.declaration())
            self.skip_newlines()
        return Document(decls)

    def declaration(self) -> Declaration:
        head = self.expect(TokenType.IDENT, "a declaration header")
        self.expect_colon()
        kind = self.expect(TokenType.IDENT, "Instance, Individual, or Model")
        self.expect_colon()
        if head.value == "Concept" and kind.value == "Instance":
            name = self.expect(TokenType.IDENT, "a concept name")
            self.end_line()
            return ConceptDecl(name.value)
        if kind.value == "Individual" and head.value in ("Attribute", "Relation"):
            return self.property_decl(PropertyKind(head.value))
        if kind.value == "Model":
            return self.model_decl(head.value)
        if kind.value == "Individual":
            return self.individual_decl(head.value)
        raise ParseError(
            f"unrecognized declaration '{head.value}: {kind.value}:'",
            head.line,
            head.column,
            expected=(
                "Concept: Instance:",
                "Attribute|Relation: Individual:",
                "<Concept>: Model:",
                "<Concept>: Individual:",
            ),
        )

    def body_depth(self) -> Optional[int]:
        """Consume the leading colon run of the next body line, if any."""
        self.skip_newlines()
        if self.at(TokenType.COLONS):
            return self.advance().value
        return None

    # -- property declarations ------------------------------------------------

    def property_decl(self, kind: PropertyKind) -> PropertyDecl:
        name = self.expect(TokenType.IDENT, "a property name")
        self.end_line()
        decl = PropertyDecl(kind, name.value)
        while (depth := self.body_depth()) is not None:
            key = self.expect(TokenType.IDENT, "DataType or Range")
            if depth != 1:
                raise ParseError("property facet lines use a single ':'", key.line, key.column)
            self.expect_colon()
            if key.value == "DataType":
                val = self.expect(TokenType.IDENT, "Numeric, Boolean, or String")
                try:
                    decl.data_type = DataType(val.value)
                except ValueError:
                    raise ParseError(
                        f"unknown DataType {val.value!r}",
                        val.line,
                        val.column,
                        expected=("Numeric", "Boolean", "String"),
                    ) from None
            elif key.value == "Range":
                val = self.expect(TokenType.IDENT, "a concept name")
                decl.range_concept = val.value
            else:
                raise ParseError(
                    f"unexpected facet {key.value!r} in a property declaration",
                    key.line,
                    key.column,
                    expected=("DataType", "Range"),
                )
            self.end_line()
        if kind is PropertyKind.ATTRIBUTE and (decl.data_type is None or decl.range_concept):
            raise ParseError(f"attribute {decl.name!r} must carry a DataType (and no Range)", name.line, name.column)
        if kind is PropertyKind.RELATION and (decl.range_concept is None or decl.data_type):
            raise ParseError(f"relation {decl.name!r} must carry a Range (and no DataType)", name.line, name.column)
        return decl

    # -- model declarations -----------------------------------------------------

    def model_decl(self, concept: str) -> ModelDecl:
        name = self.expect(TokenType.IDENT, "a model name")
        self.end_line()
        model = ModelDecl(concept, name.value)
        trail: list[tuple[int, PropertyUse]] = []  # document-order uses with depth

        def attach_use(pu: PropertyUse, depth: int, tok: Token) -> None:
            if depth == 1:
                model.properties.append(pu)
            else:
                parent = None
                for d, candidate in reversed(trail):
                    if d == depth - 1 or d < depth:
                        parent = candidate
                        break
                if parent is None:
                    raise ParseError(
                        f"no enclosing property for nesting depth {depth}",
                        tok.line,
                        tok.column,
                    )
                parent.nested.append(pu)
            trail.append((depth, pu))

        def attach_restriction(r: Restriction, depth: int, tok: Token) -> None:
            for d, candidate in reversed(trail):
                if d in (depth - 1, depth):
                    candidate.restrictions.append(r)
                    return
            raise ParseError("restriction before any property", tok.line, tok.column)

        while (depth := self.body_depth()) is not None:
            first = self.expect(TokenType.IDENT, "a property or restriction keyword")
            if not self.at(TokenType.COLONS):
                # bare use:  ": energy"
                self.end_line()
                attach_use(PropertyUse(first.value), depth, first)
                continue
            self.expect_colon()
            if first.value in ("Attribute", "Relation"):
                pname = self.expect(TokenType.IDENT, "a property name")
                self.end_line()
                attach_use(
                    PropertyUse(pname.value, PropertyKind(first.value)), depth, first
                )
            elif first.value in _RESTRICTION_KEYWORDS:
                kind = _RESTRICTION_KEYWORDS[first.value]
                attach_restriction(self.restriction_payload(kind), depth, first)
            else:
                raw = self.rest_of_line_text()
                attach_restriction(
                    Restriction(
                        RestrictionKind.UNSUPPORTED, raw=raw, keyword=first.value
                    ),
                    depth,
                    first,
                )
        return model

    def restriction_payload(self, kind: RestrictionKind) -> Restriction:
        if kind in (RestrictionKind.CONDITION, RestrictionKind.SET_VALUE):
            expr = self.expression()
            self.end_line()
            return Restriction(kind, expr=expr)
        if kind is RestrictionKind.SET_DO:
            actions = self.setdo_actions()
            self.end_line()
            return Restriction(kind, actions=actions)
        if kind is RestrictionKind.DEFAULT:
            value = self.scalar_payload()
            self.end_line()
            return Restriction(kind, value=value)
        # Multiple / Required carry a 0/1 flag
        tok = self.expect(TokenType.NUMBER, "0 or 1")
        self.end_line()
        return Restriction(kind, flag=bool(tok.value))

    def rest_of_line_text(self) -> str:
        """Source text from the current token to end of line (raw capture)."""
        tok = self.cur()
        if tok is None or tok.type is TokenType.NEWLINE:
            if tok is not None:
                self.advance()
            return ""
        text = self.lines[tok.line - 1][tok.column - 1:].strip()
        while (t := self.cur()) is not None and t.type is not TokenType.NEWLINE:
            self.advance()
        if self.cur() is not None:
            self.advance()  # the NEWLINE
        return text

    def scalar_payload(self) -> Scalar:
        tok = self.cur()
        if tok is None:
            raise ParseError("unexpected end of input, expected a value")
        if tok.type is TokenType.NUMBER:
            return self.advance().value
        if tok.type is TokenType.STRING:
            return self.advance().value
        if tok.type is TokenType.IDENT:
            return self.advance().value
        raise ParseError(
            f"unexpected {tok.type.name} {tok.value!r}, expected a value",
            tok.line,
            tok.column,
        )

    # -- individual declarations --------------------------------------------------

    def individual_decl(self, concept: str) -> IndividualDecl:
        name = self.expect(TokenType.IDENT, "an individual name")
        self.end_line()
        ind = IndividualDecl(concept, name.value)
        trail: list[tuple[int, Assignment]] = []
        while (depth := self.body_depth()) is not None:
            first = self.expect(TokenType.IDENT, "a property name")
            self.expect_colon()
            if first.value == "SetModel":
                model = self.expect(TokenType.IDENT, "a model name")
                self.end_line()
                ind.models.append(model.value)
                continue
            value = self.scalar_payload()
            self.end_line()
            a = Assignment(first.value, value)
            if depth == 1:
                ind.assignments.append(a)
            else:
                parent = None
                for d, candidate in reversed(trail):
                    if d == depth - 1 or d < depth:
                        parent = candidate
                        break
                if parent is None:
                    ind.assignments.append(a)
                else:
                    parent.children.append(a)
            trail.append((depth, a))
        return ind

    # -- expressions ----------------------------------------------------------
    #
    # precedence: || < && < comparison < unary '+' < primary

    def expression(self) -> Expression:
        return self.or_expr()

    def _take_op(self, types) -> Optional[Token]:
        """Consume an operator, looking through a soft newline when the
        continuation line is contiguous (wrapped payloads commonly break
        so the next line *starts* with the operator)."""
        self._soften_group_newlines()
        tok = self.cur()
        if tok is None:
            return None
        if tok.type in types:
            return self.advance()
        if self._group == 0 and tok.type is TokenType.NEWLINE:
            nxt = self.cur(1)
            if (
                nxt is not None
                and nxt.type in types
                and nxt.line == tok.line + 1
            ):
                self.advance()  # NEWLINE
                return self.advance()
        return None

    def _soften_group_newlines(self) -> None:
        while self._group > 0 and self.at(TokenType.NEWLINE):
            self.advance()

    def or_expr(self) -> Expression:
        node = self.and_expr()
        while (op := self._take_op({TokenType.OR})) is not None:
            node = Binary(BinOp.OR, node, self.and_expr())
            del op
        return node

    def and_expr(self) -> Expression:
        node = self.cmp_expr()
        while self._take_op({TokenType.AND}) is not None:
            node = Binary(BinOp.AND, node, self.cmp_expr())
        return node

    def cmp_expr(self) -> Expression:
        node = self.unary_expr()
        while (op := self._take_op(set(_CMP_OPS))) is not None:
            node = Binary(_CMP_OPS[op.type], node, self.unary_expr())
        return node

    def unary_expr(self) -> Expression:
        self._soften_group_newlines()
        if self.at(TokenType.PLUS):
            self.advance()
            return NumCoerce(self.unary_expr())
        return self.primary()

    def primary(self) -> Expression:
        self._soften_group_newlines()
        tok = self.cur()
        # operand on the next contiguous line after a dangling operator
        if tok is not None and tok.type is TokenType.NEWLINE:
            nxt = self.cur(1)
            if nxt is not None and nxt.line == tok.line + 1:
                self.advance()
                tok = self.cur()
        if tok is None:
            raise ExprParseError("expected a value, found end of input")
        if tok.type is TokenType.NUMBER or tok.type is TokenType.STRING:
            self.advance()
            return Literal(tok.value)
        if tok.type is TokenType.SELFDOT:
            self.advance()
            name = self.expect(TokenType.IDENT, "a property name")
            return PropRef(name.value)
        if tok.type is TokenType.CTXVAR:
            self.advance()
            if tok.value not in _CONTEXT_VARS:
                raise ExprParseError(
                    f"unknown context variable ${tok.value}", tok.line, tok.column
                )
            return ContextRef(tok.value)
        if tok.type is TokenType.DEREF_OPEN:
            # $($.rel).prop
            self.advance()
            self._group += 1
            self.expect(TokenType.SELFDOT, "'$.'")
            rel = self.expect(TokenType.IDENT, "a relation name")
            self.expect(TokenType.RPAREN, "')'")
            self._group -= 1
            self.expect(TokenType.DOT, "'.'")
            prop = self.expect(TokenType.IDENT, "a property name")
            return Deref(rel.value, prop.value)
        if tok.type is TokenType.LPAREN:
            self.advance()
            self._group += 1
            self._soften_group_newlines()
            if self.at(TokenType.DOLLAR2DOT):
                # ($$.rel).prop — alternate navigation spelling
                self.advance()
                rel = self.expect(TokenType.IDENT, "a relation name")
                self.expect(TokenType.RPAREN, "')'")
                self._group -= 1
                self.expect(TokenType.DOT, "'.'")
                prop = self.expect(TokenType.IDENT, "a property name")
                return Deref(rel.value, prop.value)
            inner = self.or_expr()
            self._soften_group_newlines()
            self.expect(TokenType.RPAREN, "')'")
            self._group -= 1
            return inner
        raise ExprParseError(
            f"expected a value, found {tok.type.name} {tok.value!r}",
            tok.line,
            tok.column,
        )

    # -- SetDo action objects --------------------------------------------------

    def setdo_actions(self) -> list[SetDoAction]:
        actions = [self.setdo_object()]
        while True:
            self._soften_group_newlines()
            tok = self.cur()
            if tok is not None and tok.type in (TokenType.LPAREN, TokenType.LBRACE):
                actions.append(self.setdo_object())
                continue
            if (
                tok is not None
                and tok.type is TokenType.NEWLINE
                and (nxt := self.cur(1)) is not None
                and nxt.type in (TokenType.LPAREN, TokenType.LBRACE)
                and nxt.line == tok.line + 1
            ):
                self.advance()
                actions.append(self.setdo_object())
                continue
            break
        return actions

    def setdo_object(self) -> SetDoAction:
        self._soften_group_newlines()
        wrapped = False
        if self.at(TokenType.LPAREN):
            self.advance()
            self._group += 1
            wrapped = True
            self._soften_group_newlines()
        start = self.cur()
        self.expect(TokenType.LBRACE, "'{'")
        self._group += 1
        pairs: list[tuple[str, object]] = []
        self._soften_group_newlines()
        while not self.at(TokenType.RBRACE):
            key_tok = self.expect(TokenType.STRING, "a quoted key")
            self.expect_colon()
            pairs.append((key_tok.value, self.setdo_value(key_tok.value, key_tok)))
            self._soften_group_newlines()
            if self.at(TokenType.COMMA):
                self.advance()
                self._soften_group_newlines()
        self.expect(TokenType.RBRACE, "'}'")
        self._group -= 1
        if wrapped:
            self._soften_group_newlines()
            self.expect(TokenType.RPAREN, "')'")
            self._group -= 1
        return self._build_action(pairs, start)

    def setdo_value(self, key: str, key_tok: Token):
        self._soften_group_newlines()
        if key in ("$do", "do"):
            return self.expect(TokenType.STRING, "an act name").value
        if key == "$IndividualID":
            tok = self.cur()
            if tok is not None and tok.type is TokenType.CTXVAR:
                self.advance()
                if tok.value != "CurrentIndividual":
                    raise SetDoParseError(
                        f"unknown target ${tok.value}", tok.line, tok.column
                    )
                return ContextRef(tok.value)
            if tok is not None and tok.type is TokenType.SELFDOT:
                self.advance()
                name = self.expect(TokenType.IDENT, "a relation name")
                return PropRef(name.value)
            raise SetDoParseError(
                "target must be $CurrentIndividual or a $.relation",
                key_tok.line,
                key_tok.column,
            )
        if key == "$Condition":
            return self.or_expr()
        if key.startswith("$"):
            raise SetDoParseError(
                f"unknown directive key {key!r}", key_tok.line, key_tok.column
            )
        return self.scalar_payload()

    def _build_action(self, pairs, start: Optional[Token]) -> SetDoAction:
        act = target = guard = None
        assignments: list[tuple[str, Scalar]] = []
        line = start.line if start else 0
        col = start.column if start else 0
        for key, value in pairs:
            if key in ("$do", "do"):
                if act is not None:
                    raise SetDoParseError("duplicate $do key", line, col)
                act = value
            elif key == "$IndividualID":
                if target is not None:
                    raise SetDoParseError("duplicate $IndividualID key", line, col)
                target = value
            elif key == "$Condition":
                if guard is not None:
                    raise SetDoParseError("duplicate $Condition key", line, col)
                guard = value
            else:
                assignments.append((key, value))
        if act is None:
            raise SetDoParseError("action object is missing '$do'", line, col)
        if act != "EditIndividual":
            raise SetDoParseError(f"unsupported act {act!r}", line, col)
        if target is None:
            raise SetDoParseError("action object is missing '$IndividualID'", line, col)
        if guard is None:
            raise SetDoParseError("action object is missing '$Condition'", line, col)
        if not assignments:
            raise SetDoParseError("action object assigns no properties", line, col)
        return SetDoAction(act, target, guard, assignments)
