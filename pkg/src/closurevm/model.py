"""Values, binding cells, lexical frames and free-variable analysis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import MalformedForm
from .reader import FunctionRef, ListForm, Quoted, SExpr, SymbolAtom
from .symbols import SYMBOLS, Symbol, SymbolTable, intern

__all__ = [
    "Symbol",
    "SymbolTable",
    "SYMBOLS",
    "intern",
    "Cell",
    "LexicalFrame",
    "GlobalTable",
    "Builtin",
    "CodeObject",
    "FunctionObject",
    "Bundle",
    "ORDINARY",
    "CLOSURE",
    "SPECIAL_FORMS",
    "lookup_lexical",
    "cell_read",
    "cell_write",
    "free_variables",
    "lambda_parts",
    "print_value",
]

S_SETQ = intern("setq")
S_LET = intern("let")
S_LAMBDA = intern("lambda")
S_QUOTE = intern("quote")
S_IF = intern("if")
S_MVSETQ = intern("multiple-value-setq")
S_FUNCALL = intern("funcall")
S_NIL = intern("nil")
S_T = intern("t")

SPECIAL_FORMS = frozenset({S_SETQ, S_LET, S_LAMBDA, S_QUOTE, S_IF, S_MVSETQ, S_FUNCALL})

ORDINARY = "Function"
CLOSURE = "Closure"

_cell_ids = itertools.count(1)


class Cell:
    """Identity-bearing mutable holder of one value."""

    __slots__ = ("ident", "value")

    def __init__(self, value: Any, ident: int | None = None):
        self.ident = next(_cell_ids) if ident is None else ident
        self.value = value

    def __repr__(self) -> str:
        return f"Cell#{self.ident}({self.value!r})"


def cell_read(cell: Cell) -> Any:
    return cell.value


def cell_write(cell: Cell, value: Any) -> None:
    cell.value = value


class LexicalFrame:
    __slots__ = ("bindings", "parent")

    def __init__(self, bindings: dict[Symbol, Cell], parent: LexicalFrame | None = None):
        self.bindings = bindings
        self.parent = parent


def lookup_lexical(frame: LexicalFrame | None, sym: Symbol) -> Cell | None:
    while frame is not None:
        cell = frame.bindings.get(sym)
        if cell is not None:
            return cell
        frame = frame.parent
    return None


@dataclass(eq=False)
class Builtin:
    """A native operation reachable through `#'name` or operator position."""

    name: str
    fn: Callable[..., Any]
    cost: Callable[[tuple], int]
    min_args: int = 0
    max_args: int | None = None


@dataclass
class GlobalTable:
    variables: dict[Symbol, Cell] = field(default_factory=dict)
    builtins: dict[Symbol, Builtin] = field(default_factory=dict)


@dataclass(eq=False)
class CodeObject:
    site_id: int
    params: tuple[Symbol, ...]
    body: tuple[SExpr, ...]
    form: ListForm
    free: frozenset[Symbol]


class FunctionObject:
    __slots__ = ("kind", "code", "captures", "print_id")

    def __init__(self, code: CodeObject, captures: dict[Symbol, Cell], print_id: int):
        self.kind = CLOSURE if captures else ORDINARY
        self.code = code
        self.captures = captures
        self.print_id = print_id

    def __repr__(self) -> str:
        return f"#<{self.kind} {self.print_id}>"


class Bundle(tuple):
    """Multiple values returned by `values`; never stored in a list or cell."""

    __slots__ = ()

    def first(self) -> Any:
        return self[0] if self else ()


def lambda_parts(form: ListForm) -> tuple[tuple[Symbol, ...], tuple[SExpr, ...]]:
    """Split `(lambda (params...) body...)` into params and body."""
    elems = form.elements
    if len(elems) < 2 or not isinstance(elems[1], ListForm):
        raise MalformedForm("lambda needs a parameter list", form.position)
    params = []
    for p in elems[1].elements:
        if not isinstance(p, SymbolAtom):
            raise MalformedForm("lambda parameters must be symbols", form.position)
        params.append(p.symbol)
    if len(set(params)) != len(params):
        raise MalformedForm("duplicate lambda parameter", form.position)
    return tuple(params), elems[2:]


def free_variables(form: ListForm, globals: GlobalTable | None = None) -> set[Symbol]:
    """Symbols referenced as variables in a lambda and not bound inside it.

    Operator-position symbols live in the function namespace and are never
    variables; `#'x` and quoted data contribute nothing. `setq` targets do
    count, since assigning a captured variable must reach its cell.
    """
    params, body = lambda_parts(form)
    free: set[Symbol] = set()
    bound = frozenset(params)
    for sub in body:
        _collect(sub, bound, free)
    return free


def _collect(form: SExpr, bound: frozenset[Symbol], free: set[Symbol]) -> None:
    if isinstance(form, SymbolAtom):
        sym = form.symbol
        if sym not in bound and sym is not S_NIL and sym is not S_T:
            free.add(sym)
        return
    if isinstance(form, (FunctionRef, Quoted)) or not isinstance(form, ListForm):
        return
    elems = form.elements
    if not elems:
        return
    head = elems[0]
    if not isinstance(head, SymbolAtom):
        for e in elems:
            _collect(e, bound, free)
        return
    op = head.symbol
    if op is S_QUOTE:
        return
    if op is S_LAMBDA:
        free.update(free_variables(form) - bound)
        return
    if op is S_LET:
        if len(elems) < 2 or not isinstance(elems[1], ListForm):
            raise MalformedForm("let needs a binding list", form.position)
        names = []
        for binding in elems[1].elements:
            name, init = _let_binding(binding, form)
            names.append(name)
            if init is not None:
                _collect(init, bound, free)
        inner = bound | frozenset(names)
        for e in elems[2:]:
            _collect(e, inner, free)
        return
    if op is S_MVSETQ:
        if len(elems) >= 2 and isinstance(elems[1], ListForm):
            for e in elems[1].elements:
                _collect(e, bound, free)
        for e in elems[2:]:
            _collect(e, bound, free)
        return
    # setq, if, funcall and builtin applications: every argument position.
    for e in elems[1:]:
        _collect(e, bound, free)


def _let_binding(binding: SExpr, form: ListForm) -> tuple[Symbol, SExpr | None]:
    if isinstance(binding, SymbolAtom):
        return binding.symbol, None
    if (
        isinstance(binding, ListForm)
        and 1 <= len(binding.elements) <= 2
        and isinstance(binding.elements[0], SymbolAtom)
    ):
        init = binding.elements[1] if len(binding.elements) == 2 else None
        return binding.elements[0].symbol, init
    raise MalformedForm("let binding must be (name init)", form.position)


def _quote_string(text: str) -> str:
    escaped = (
        text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    )
    return '"' + escaped + '"'


def print_value(value: Any) -> str:
    if isinstance(value, Bundle):
        return print_value(value.first())
    if isinstance(value, bool):
        raise TypeError("booleans are not language values")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return _quote_string(value)
    if isinstance(value, tuple):
        return "(" + " ".join(print_value(v) for v in value) + ")"
    if isinstance(value, Symbol):
        return value.name
    if isinstance(value, FunctionObject):
        return f"#<{value.kind} {value.print_id}>"
    if isinstance(value, Builtin):
        return f"#<Function {value.name}>"
    raise TypeError(f"not a language value: {value!r}")
