"""Tree-walking evaluator over the instrumented machine.

A lambda evaluated where none of its free variables is lexically bound
yields an ordinary function; otherwise it yields a closure holding the
binding cells of exactly those variables. Globals are never captured and
are looked up when the code runs.
"""

from __future__ import annotations

import io
import sys
import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterable

from .builtins import install
from .errors import (
    ArityMismatch,
    LispError,
    MalformedForm,
    NotAFunction,
    StackOverflow,
    UnboundVariable,
    UndefinedFunction,
)
from .machine import CALL, EVAL, PREPARE, ActivationRecord, Machine, DEFAULT_DEPTH_LIMIT
from .model import (
    S_FUNCALL,
    S_IF,
    S_LAMBDA,
    S_LET,
    S_MVSETQ,
    S_NIL,
    S_QUOTE,
    S_SETQ,
    S_T,
    Builtin,
    Bundle,
    Cell,
    CodeObject,
    FunctionObject,
    GlobalTable,
    LexicalFrame,
    _let_binding,
    free_variables,
    lambda_parts,
    print_value,
)
from .reader import (
    FunctionRef,
    IntegerAtom,
    ListForm,
    Quoted,
    SExpr,
    StringAtom,
    SymbolAtom,
    read_all,
)
from .symbols import Symbol, intern

# Python frames consumed per interpreted call level, with headroom.
_PY_FRAMES_PER_CALL = 12


# C stack for interpreted recursion at the default depth limit; the main
# thread's few megabytes segfault long before that.
DEEP_STACK_BYTES = 512 * 1024 * 1024
_deep = threading.local()
_stack_size_lock = threading.Lock()


def on_deep_stack(fn: Callable[[], Any]) -> Any:
    """Run `fn` on a thread with a large C stack and return its result."""
    if getattr(_deep, "active", False):
        return fn()
    box: dict[str, Any] = {}

    def target() -> None:
        _deep.active = True
        try:
            box["value"] = fn()
        except BaseException as exc:  # re-raised in the caller's thread
            box["error"] = exc

    with _stack_size_lock:
        old = threading.stack_size(DEEP_STACK_BYTES)
        try:
            worker = threading.Thread(target=target, name="closurevm-eval")
            worker.start()
        finally:
            threading.stack_size(old)
    worker.join()
    if "error" in box:
        raise box["error"]
    return box.get("value")


def collapse(value: Any) -> Any:
    return value.first() if isinstance(value, Bundle) else value


def truthy(value: Any) -> bool:
    return value != ()


class Interpreter:
    """One interpreter instance: global table, machine and code registry.

    Instances share nothing mutable and are confined to one thread.
    """

    def __init__(self, depth_limit: int = DEFAULT_DEPTH_LIMIT, out: Any = None):
        self.out = out if out is not None else sys.stdout
        self.globals = install(GlobalTable(), lambda text: self.out.write(text))
        self.machine = Machine(depth_limit)
        self._codes: dict[int, CodeObject] = {}
        self._next_site = 1
        self._next_print_id = 1
        self._special = {
            S_SETQ: self._setq,
            S_LET: self._let,
            S_LAMBDA: self._lambda,
            S_QUOTE: self._quote,
            S_IF: self._if,
            S_MVSETQ: self._mvsetq,
            S_FUNCALL: self._funcall,
        }
        needed = depth_limit * _PY_FRAMES_PER_CALL + 1000
        if sys.getrecursionlimit() < needed:
            sys.setrecursionlimit(needed)

    # -- top level -----------------------------------------------------------

    def eval_toplevel(self, form: SExpr) -> Any:
        """Evaluate one top-level form and collapse multiple values.

        The activation stack and the current phase are restored whatever
        happens.
        """
        return on_deep_stack(lambda: self._eval_toplevel(form))

    def _eval_toplevel(self, form: SExpr) -> Any:
        machine = self.machine
        depth = machine.depth
        machine.phase = EVAL
        try:
            return collapse(self.eval(form, None))
        except RecursionError:
            raise StackOverflow("host recursion limit reached") from None
        finally:
            machine.unwind(depth)
            machine.phase = EVAL

    def run_text(self, text: str) -> list[Any]:
        return [self.eval_toplevel(form) for form in read_all(text)]

    def load(self, text: str) -> Any:
        result: Any = ()
        for form in read_all(text):
            result = self.eval_toplevel(form)
        return result

    def capture(self, text: str) -> str:
        """Evaluate `text` at top level and return what a REPL would show."""
        saved = self.out
        buf = io.StringIO()
        self.out = buf
        try:
            lines = []
            for form in read_all(text):
                try:
                    value = self.eval_toplevel(form)
                except LispError as exc:
                    lines.append(buf.getvalue() + f"error: {exc}")
                    buf.seek(0)
                    buf.truncate()
                    continue
                lines.append(buf.getvalue() + print_value(value))
                buf.seek(0)
                buf.truncate()
            return "\n".join(lines)
        finally:
            self.out = saved

    def global_value(self, name: str) -> Any:
        cell = self.globals.variables.get(intern(name))
        if cell is None:
            raise UnboundVariable(name)
        return cell.value

    # -- evaluation ----------------------------------------------------------

    def eval(self, form: SExpr, env: LexicalFrame | None) -> Any:
        self.machine.step(1)
        cls = type(form)
        if cls is SymbolAtom:
            return self._lookup(form.symbol, env, form.position)
        if cls is IntegerAtom:
            return form.value
        if cls is ListForm:
            elems = form.elements
            if not elems:
                return ()
            head = elems[0]
            if type(head) is not SymbolAtom:
                raise MalformedForm("operator must be a symbol", form.position)
            special = self._special.get(head.symbol)
            if special is not None:
                return special(form, env)
            builtin = self.globals.builtins.get(head.symbol)
            if builtin is None:
                raise UndefinedFunction(
                    f"{head.symbol.name} is not a builtin; use funcall for function values",
                    head.position,
                )
            args = [collapse(self.eval(a, env)) for a in elems[1:]]
            return self.apply_builtin(builtin, args, form.position)
        if cls is StringAtom:
            return form.text
        if cls is FunctionRef:
            return self._function_ref(form)
        if cls is Quoted:
            return datum(form.inner)
        raise MalformedForm(f"cannot evaluate {form!r}")

    def eval_body(self, body: Iterable[SExpr], env: LexicalFrame | None) -> Any:
        result: Any = ()
        for form in body:
            result = self.eval(form, env)
        return result

    def _lookup(self, sym: Symbol, env: LexicalFrame | None, position) -> Any:
        if sym is S_NIL:
            return ()
        if sym is S_T:
            return S_T
        traversed = 0
        frame = env
        while frame is not None:
            traversed += 1
            cell = frame.bindings.get(sym)
            if cell is not None:
                self.machine.step(traversed)
                return cell.value
            frame = frame.parent
        self.machine.step(traversed + 1)
        cell = self.globals.variables.get(sym)
        if cell is None:
            raise UnboundVariable(sym.name, position)
        return cell.value

    def _assign(self, sym: Symbol, value: Any, env: LexicalFrame | None, position) -> None:
        if sym is S_NIL or sym is S_T:
            raise MalformedForm(f"cannot assign the constant {sym.name}", position)
        traversed = 0
        frame = env
        while frame is not None:
            traversed += 1
            cell = frame.bindings.get(sym)
            if cell is not None:
                self.machine.step(traversed)
                cell.value = value
                return
            frame = frame.parent
        self.machine.step(traversed + 1)
        cell = self.globals.variables.get(sym)
        if cell is None:
            self.globals.variables[sym] = self.new_cell(value)
        else:
            cell.value = value

    def new_cell(self, value: Any) -> Cell:
        self.machine.counters.cell_allocations += 1
        return Cell(value)

    def _function_ref(self, form: FunctionRef) -> Builtin:
        sym = form.inner.symbol
        builtin = self.globals.builtins.get(sym)
        if builtin is None:
            raise UndefinedFunction(f"#'{sym.name}: no builtin of that name", form.position)
        return builtin

    # -- functions -----------------------------------------------------------

    def code_for(self, form: ListForm) -> CodeObject:
        """The unique code object of one lambda occurrence in source."""
        code = self._codes.get(id(form))
        if code is None or code.form is not form:
            params, body = lambda_parts(form)
            free = frozenset(free_variables(form))
            code = CodeObject(self._next_site, params, body, form, free)
            self._next_site += 1
            self._codes[id(form)] = code
        return code

    def make_function(self, form: ListForm, env: LexicalFrame | None) -> FunctionObject:
        code = self.code_for(form)
        captures: dict[Symbol, Cell] = {}
        if env is not None:
            for sym in sorted(code.free, key=lambda s: s.id):
                frame = env
                while frame is not None:
                    cell = frame.bindings.get(sym)
                    if cell is not None:
                        captures[sym] = cell
                        break
                    frame = frame.parent
        self.machine.record_generation(code.site_id, bool(captures), 1 + len(captures))
        fn = FunctionObject(code, captures, self._next_print_id)
        self._next_print_id += 1
        return fn

    def apply(self, fn: Any, args: list[Any], position=None) -> Any:
        if isinstance(fn, FunctionObject):
            return self.invoke(fn, args, position)
        if isinstance(fn, Builtin):
            return self.apply_builtin(fn, args, position)
        raise NotAFunction(f"{print_value(collapse(fn))} is not a function", position)

    def invoke(self, fn: FunctionObject, args: list[Any], return_descriptor: Any = None) -> Any:
        params = fn.code.params
        if len(args) != len(params):
            raise ArityMismatch(
                f"function {fn.print_id} takes {len(params)} argument(s), got {len(args)}",
                return_descriptor if isinstance(return_descriptor, tuple) else None,
            )
        machine = self.machine
        machine.push_frame(ActivationRecord(return_descriptor, fn, tuple(args)))
        outer_phase = machine.phase
        if outer_phase != PREPARE:
            machine.phase = CALL
        try:
            cells = {p: self.new_cell(a) for p, a in zip(params, args)}
            parent = LexicalFrame(fn.captures) if fn.captures else None
            return self.eval_body(fn.code.body, LexicalFrame(cells, parent))
        finally:
            machine.phase = outer_phase
            machine.pop_frame()

    def apply_builtin(self, builtin: Builtin, args: list[Any], position=None) -> Any:
        n = len(args)
        if n < builtin.min_args or (builtin.max_args is not None and n > builtin.max_args):
            raise ArityMismatch(f"{builtin.name}: wrong number of arguments ({n})", position)
        args_t = tuple(args)
        self.machine.step(1 + builtin.cost(args_t))
        try:
            return builtin.fn(*args_t)
        except LispError as exc:
            if exc.position is None:
                exc.position = position
            raise

    # -- special forms -------------------------------------------------------

    def _lambda(self, form: ListForm, env: LexicalFrame | None) -> FunctionObject:
        return self.make_function(form, env)

    def _quote(self, form: ListForm, env: LexicalFrame | None) -> Any:
        if len(form.elements) != 2:
            raise MalformedForm("quote takes one argument", form.position)
        return datum(form.elements[1])

    def _if(self, form: ListForm, env: LexicalFrame | None) -> Any:
        elems = form.elements
        if len(elems) not in (3, 4):
            raise MalformedForm("if takes a test, a then-form and an optional else-form", form.position)
        if truthy(collapse(self.eval(elems[1], env))):
            return self.eval(elems[2], env)
        return self.eval(elems[3], env) if len(elems) == 4 else ()

    def _setq(self, form: ListForm, env: LexicalFrame | None) -> Any:
        elems = form.elements[1:]
        if not elems or len(elems) % 2:
            raise MalformedForm("setq needs symbol/value pairs", form.position)
        value: Any = ()
        for target, value_form in zip(elems[::2], elems[1::2]):
            if type(target) is not SymbolAtom:
                raise MalformedForm("setq target must be a symbol", form.position)
            value = collapse(self.eval(value_form, env))
            self._assign(target.symbol, value, env, target.position)
        return value

    def _let(self, form: ListForm, env: LexicalFrame | None) -> Any:
        elems = form.elements
        if len(elems) < 2 or not isinstance(elems[1], ListForm):
            raise MalformedForm("let needs a binding list", form.position)
        bindings = [_let_binding(b, form) for b in elems[1].elements]
        names = [name for name, _ in bindings]
        if len(set(names)) != len(names):
            raise MalformedForm("duplicate bound symbol in let", form.position)
        machine = self.machine
        outer_phase = machine.phase
        machine.phase = PREPARE
        try:
            values = [collapse(self.eval(init, env)) if init is not None else () for _, init in bindings]
        finally:
            machine.phase = outer_phase
        cells = {name: self.new_cell(v) for name, v in zip(names, values)}
        return self.eval_body(elems[2:], LexicalFrame(cells, env))

    def _mvsetq(self, form: ListForm, env: LexicalFrame | None) -> Any:
        elems = form.elements
        if len(elems) != 3 or not isinstance(elems[1], ListForm):
            raise MalformedForm("multiple-value-setq needs (symbols...) and one form", form.position)
        targets = elems[1].elements
        for t in targets:
            if type(t) is not SymbolAtom:
                raise MalformedForm("multiple-value-setq targets must be symbols", form.position)
        result = self.eval(elems[2], env)
        values = tuple(result) if isinstance(result, Bundle) else (result,)
        for i, t in enumerate(targets):
            self._assign(t.symbol, values[i] if i < len(values) else (), env, t.position)
        return values[0] if values else ()

    def _funcall(self, form: ListForm, env: LexicalFrame | None) -> Any:
        elems = form.elements
        if len(elems) < 2:
            raise MalformedForm("funcall needs a function argument", form.position)
        fn = collapse(self.eval(elems[1], env))
        args = [collapse(self.eval(a, env)) for a in elems[2:]]
        return self.apply(fn, args, form.position)


def datum(form: SExpr) -> Any:
    """The value denoted by quoted source text."""
    if isinstance(form, IntegerAtom):
        return form.value
    if isinstance(form, StringAtom):
        return form.text
    if isinstance(form, SymbolAtom):
        return () if form.symbol is S_NIL else form.symbol
    if isinstance(form, ListForm):
        return tuple(datum(e) for e in form.elements)
    if isinstance(form, Quoted):
        return (S_QUOTE, datum(form.inner))
    if isinstance(form, FunctionRef):
        return (intern("function"), form.inner.symbol)
    raise MalformedForm(f"cannot quote {form!r}")


# -- functional surface ------------------------------------------------------


@dataclass(frozen=True)
class EvalContext:
    interp: Interpreter
    lexical: LexicalFrame | None = None

    @property
    def globals(self) -> GlobalTable:
        return self.interp.globals

    @property
    def machine(self) -> Machine:
        return self.interp.machine


def eval_expr(form: SExpr, ctx: EvalContext) -> Any:
    return ctx.interp.eval(form, ctx.lexical)


def make_function(form: ListForm, ctx: EvalContext) -> FunctionObject:
    return ctx.interp.make_function(form, ctx.lexical)


def invoke(fn: FunctionObject, args: list[Any], ctx: EvalContext) -> Any:
    return ctx.interp.invoke(fn, list(args))


def builtin_apply(name: Symbol, args: list[Any], ctx: EvalContext) -> Any:
    builtin = ctx.globals.builtins.get(name)
    if builtin is None:
        raise UndefinedFunction(name.name)
    return ctx.interp.apply_builtin(builtin, list(args))
