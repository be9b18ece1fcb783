"""Line-oriented lexer for BSL.

Produces a flat token stream. Structural facts the parser relies on:

* a run of leading (or interior) colons becomes one ``COLONS`` token whose
  value is the run length, so ``::`` and ``:::`` keep their depth;
* adjacent bare words merge into a single ``IDENT`` (``John Doe``,
  ``Model Survivor``) with interior whitespace normalized to one space —
  names with spaces only ever occur in value position, where nothing else
  can follow them on the line;
* ``#`` starts a comment (outside string literals) running to end of line;
  comment-only and blank lines emit no tokens at all, so a gap in token
  line numbers marks a blank separator;
* every content line is terminated by a ``NEWLINE`` token.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto
from typing import Any

from ..errors import LexError


class TokenType(Enum):
    COLONS = auto()        # value: run length
    IDENT = auto()         # value: word or space-joined words
    NUMBER = auto()        # value: int | float
    STRING = auto()        # value: str (quotes stripped)
    CTXVAR = auto()        # value: name after '$' (Value, CurrentIndividual, ...)
    SELFDOT = auto()       # '$.'
    DEREF_OPEN = auto()    # '$('
    DOLLAR2DOT = auto()    # '$$.'
    DOT = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACE = auto()
    RBRACE = auto()
    COMMA = auto()
    PLUS = auto()
    EQ = auto()            # ==
    SEQ = auto()           # ===
    LT = auto()
    GT = auto()
    GE = auto()
    AND = auto()           # &&
    OR = auto()            # ||
    NEWLINE = auto()


@dataclass(frozen=True)
class Token:
    type: TokenType
    value: Any
    line: int
    column: int

    def __repr__(self):  # compact, for parser error messages
        return f"{self.type.name}({self.value!r})@{self.line}:{self.column}"


def _is_word_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(source: str) -> list[Token]:
    """Lex BSL source into a token stream.

    Raises LexError (with line/column) on any character outside the
    surface grammar.
    """
    tokens: list[Token] = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line_tokens = _lex_line(raw, lineno)
        if line_tokens:
            tokens.extend(line_tokens)
            tokens.append(Token(TokenType.NEWLINE, None, lineno, len(raw) + 1))
    return tokens


def _lex_line(raw: str, lineno: int) -> list[Token]:
    out: list[Token] = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        col = i + 1
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            break
        if ch == ":":
            j = i
            while j < n and raw[j] == ":":
                j += 1
            out.append(Token(TokenType.COLONS, j - i, lineno, col))
            i = j
            continue
        if ch in "'\"":
            j = raw.find(ch, i + 1)
            if j < 0:
                raise LexError("unterminated string literal", lineno, col)
            out.append(Token(TokenType.STRING, raw[i + 1:j], lineno, col))
            i = j + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and (raw[j].isdigit() or raw[j] == "."):
                j += 1
            text = raw[i:j]
            value: Any = float(text) if "." in text else int(text)
            out.append(Token(TokenType.NUMBER, value, lineno, col))
            i = j
            continue
        if _is_word_start(ch):
            words = []
            j = i
            while True:
                k = j
                while k < n and _is_word_char(raw[k]):
                    k += 1
                words.append(raw[j:k])
                # merge a following bare word separated only by spaces
                m = k
                while m < n and raw[m] == " ":
                    m += 1
                if m < n and _is_word_start(raw[m]) and m > k:
                    j = m
                    continue
                j = k
                break
            out.append(Token(TokenType.IDENT, " ".join(words), lineno, col))
            i = j
            continue
        if ch == "$":
            nxt = raw[i + 1] if i + 1 < n else ""
            if nxt == ".":
                out.append(Token(TokenType.SELFDOT, "$.", lineno, col))
                i += 2
                continue
            if nxt == "(":
                out.append(Token(TokenType.DEREF_OPEN, "$(", lineno, col))
                i += 2
                continue
            if nxt == "$" and i + 2 < n and raw[i + 2] == ".":
                out.append(Token(TokenType.DOLLAR2DOT, "$$.", lineno, col))
                i += 3
                continue
            if nxt and _is_word_start(nxt):
                k = i + 1
                while k < n and _is_word_char(raw[k]):
                    k += 1
                out.append(Token(TokenType.CTXVAR, raw[i + 1:k], lineno, col))
                i = k
                continue
            raise LexError(f"unknown sigil {raw[i:i + 2]!r}", lineno, col)
        if ch == "=":
            if raw.startswith("===", i):
                out.append(Token(TokenType.SEQ, "===", lineno, col))
                i += 3
                continue
            if raw.startswith("==", i):
                out.append(Token(TokenType.EQ, "==", lineno, col))
                i += 2
                continue
            raise LexError("single '=' is not an operator", lineno, col)
        if ch == "&":
            if raw.startswith("&&", i):
                out.append(Token(TokenType.AND, "&&", lineno, col))
                i += 2
                continue
            raise LexError("single '&' is not an operator", lineno, col)
        if ch == "|":
            if raw.startswith("||", i):
                out.append(Token(TokenType.OR, "||", lineno, col))
                i += 2
                continue
            raise LexError("single '|' is not an operator", lineno, col)
        if ch == ">":
            if raw.startswith(">=", i):
                out.append(Token(TokenType.GE, ">=", lineno, col))
                i += 2
                continue
            out.append(Token(TokenType.GT, ">", lineno, col))
            i += 1
            continue
        simple = {
            "<": TokenType.LT,
            ".": TokenType.DOT,
            "(": TokenType.LPAREN,
            ")": TokenType.RPAREN,
            "{": TokenType.LBRACE,
            "}": TokenType.RBRACE,
            ",": TokenType.COMMA,
            "+": TokenType.PLUS,
        }
        if ch in simple:
            out.append(Token(simple[ch], ch, lineno, col))
            i += 1
            continue
        raise LexError(f"illegal character {ch!r}", lineno, col)
    return out
