"""Tokenizer, parser and printer for the surface S-expression syntax."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .errors import ReaderError
from .symbols import SYMBOLS, Symbol

LPAREN = "lparen"
RPAREN = "rparen"
INTEGER = "integer"
STRING = "string"
SYMBOL = "symbol"
FUNCTION_REF = "function-ref-marker"
QUOTE = "quote-marker"

# Identifier characters: alphanumerics plus the punctuation used by the
# session symbols (N+_x_N*, CS_x_[N+_x_N*], 1+, multiple-value-setq, <, =).
_SYMBOL_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyz"
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "0123456789"
    "+-*/_[]<>=!?%&.:"
)
_INTEGER_RE = re.compile(r"-?[0-9]+")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    position: tuple[int, int]


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(count: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance()
        elif ch == ";":
            while i < n and text[i] != "\n":
                advance()
        elif ch == "(":
            tokens.append(Token(LPAREN, "(", (line, col)))
            advance()
        elif ch == ")":
            tokens.append(Token(RPAREN, ")", (line, col)))
            advance()
        elif ch == "'":
            tokens.append(Token(QUOTE, "'", (line, col)))
            advance()
        elif ch == "#":
            if i + 1 < n and text[i + 1] == "'":
                tokens.append(Token(FUNCTION_REF, "#'", (line, col)))
                advance(2)
            else:
                raise ReaderError("illegal character '#'", (line, col))
        elif ch == '"':
            start = (line, col)
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ReaderError("unterminated string", start)
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise ReaderError("unterminated string", start)
            tokens.append(Token(STRING, text[i : j + 1], start))
            advance(j + 1 - i)
        elif ch in _SYMBOL_CHARS:
            start = (line, col)
            j = i
            while j < n and text[j] in _SYMBOL_CHARS:
                j += 1
            lexeme = text[i:j]
            kind = INTEGER if _INTEGER_RE.fullmatch(lexeme) else SYMBOL
            tokens.append(Token(kind, lexeme, start))
            advance(j - i)
        else:
            raise ReaderError(f"illegal character {ch!r}", (line, col))
    return tokens


# -- forms ------------------------------------------------------------------


@dataclass(frozen=True)
class IntegerAtom:
    value: int
    position: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class StringAtom:
    text: str
    position: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SymbolAtom:
    symbol: Symbol
    position: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True, eq=False)
class ListForm:
    """A parenthesised form.

    Equality is structural, but hashing is by identity: a lambda occurrence
    in source is identified by its ListForm node.
    """

    elements: tuple
    position: tuple[int, int] | None = None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ListForm) and self.elements == other.elements

    __hash__ = object.__hash__


@dataclass(frozen=True)
class FunctionRef:
    inner: SymbolAtom
    position: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Quoted:
    inner: "SExpr"
    position: tuple[int, int] | None = field(default=None, compare=False)


SExpr = Union[IntegerAtom, StringAtom, SymbolAtom, ListForm, FunctionRef, Quoted]


def _unescape(lexeme: str) -> str:
    body = lexeme[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def parse(tokens: list[Token]) -> list[SExpr]:
    pos = 0

    def read() -> SExpr:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok.kind == INTEGER:
            return IntegerAtom(int(tok.lexeme), tok.position)
        if tok.kind == STRING:
            return StringAtom(_unescape(tok.lexeme), tok.position)
        if tok.kind == SYMBOL:
            return SymbolAtom(SYMBOLS.intern(tok.lexeme), tok.position)
        if tok.kind in (QUOTE, FUNCTION_REF):
            if pos >= len(tokens):
                raise ReaderError(f"dangling {tok.lexeme} at end of input", tok.position)
            if tokens[pos].kind == RPAREN:
                raise ReaderError(f"{tok.lexeme} followed by ')'", tokens[pos].position)
            inner = read()
            if tok.kind == QUOTE:
                return Quoted(inner, tok.position)
            if not isinstance(inner, SymbolAtom):
                raise ReaderError("#' must be followed by a symbol", tok.position)
            return FunctionRef(inner, tok.position)
        if tok.kind == LPAREN:
            elements = []
            while True:
                if pos >= len(tokens):
                    raise ReaderError("unbalanced '(': missing ')'", tok.position)
                if tokens[pos].kind == RPAREN:
                    pos += 1
                    return ListForm(tuple(elements), tok.position)
                elements.append(read())
        raise ReaderError("unexpected ')'", tok.position)

    forms = []
    while pos < len(tokens):
        forms.append(read())
    return forms


def read_all(text: str) -> list[SExpr]:
    return parse(tokenize(text))


def paren_depth(text: str) -> int | None:
    """Net open-paren count of `text`, or None while a string is still open.

    Used by the REPL and the transcript loader to decide whether an input
    needs continuation lines. Illegal characters are ignored here; the
    real tokenizer reports them once the input is complete.
    """
    depth = 0
    in_string = False
    escaped = False
    in_comment = False
    for ch in text:
        if in_comment:
            in_comment = ch != "\n"
        elif in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == ";":
            in_comment = True
        elif ch == '"':
            in_string = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
    return None if in_string else depth


def _quote_string(text: str) -> str:
    escaped = (
        text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    )
    return '"' + escaped + '"'


def print_form(form: SExpr) -> str:
    if isinstance(form, IntegerAtom):
        return str(form.value)
    if isinstance(form, StringAtom):
        return _quote_string(form.text)
    if isinstance(form, SymbolAtom):
        return form.symbol.name
    if isinstance(form, ListForm):
        return "(" + " ".join(print_form(e) for e in form.elements) + ")"
    if isinstance(form, FunctionRef):
        return "#'" + print_form(form.inner)
    if isinstance(form, Quoted):
        return "'" + print_form(form.inner)
    raise TypeError(f"not a form: {form!r}")
