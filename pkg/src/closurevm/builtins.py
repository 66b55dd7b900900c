"""Native operations of the function namespace and their step costs.

Each builtin carries a cost rule; applying it charges ``1 + cost(args)``.
Integer arithmetic costs one step per 64-bit limb of the larger operand at
each pairwise step. List and string builtins cost one step per element or
character touched.
"""

from __future__ import annotations

from typing import Any, Callable

from .errors import LispTypeError
from .model import Builtin, Bundle, FunctionObject, GlobalTable, print_value
from .symbols import Symbol, intern

LIMB_BITS = 64
T = intern("t")
NIL: tuple = ()
S_STRING = intern("string")


def limbs(n: int) -> int:
    return max(1, -(-abs(n).bit_length() // LIMB_BITS))


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_list(v: Any) -> bool:
    return isinstance(v, tuple)


def _check(name: str, pred: Callable[[Any], bool], what: str, value: Any) -> None:
    if not pred(value):
        raise LispTypeError(f"{name}: expected {what}, got {_show(value)}")


def _show(value: Any) -> str:
    try:
        return print_value(value)
    except TypeError:
        return repr(value)


def _ints(name: str, args: tuple) -> None:
    for a in args:
        _check(name, _is_int, "an integer", a)


def _fold_cost(args: tuple, op: Callable[[int, int], int], start: int) -> int:
    acc = start
    cost = 0
    for a in args:
        if not _is_int(a):
            return 0  # the operation itself reports the type error
        cost += max(limbs(acc), limbs(a))
        acc = op(acc, a)
    return cost


def _pairwise_cost(args: tuple) -> int:
    if not all(_is_int(a) for a in args):
        return 0
    return sum(max(limbs(a), limbs(b)) for a, b in zip(args, args[1:]))


# -- arithmetic ---------------------------------------------------------------


def _add(*args: Any) -> int:
    _ints("+", args)
    return sum(args)


def _sub(*args: Any) -> int:
    _ints("-", args)
    if len(args) == 1:
        return -args[0]
    result = args[0]
    for a in args[1:]:
        result -= a
    return result


def _mul(*args: Any) -> int:
    _ints("*", args)
    result = 1
    for a in args:
        result *= a
    return result


def _inc(x: Any) -> int:
    _ints("1+", (x,))
    return x + 1


def _num_eq(*args: Any) -> Any:
    _ints("=", args)
    return T if all(a == b for a, b in zip(args, args[1:])) else NIL


def _less(*args: Any) -> Any:
    _ints("<", args)
    return T if all(a < b for a, b in zip(args, args[1:])) else NIL


# -- lists --------------------------------------------------------------------


def _first(lst: Any) -> Any:
    _check("first", _is_list, "a list", lst)
    return lst[0] if lst else NIL


def _second(lst: Any) -> Any:
    _check("second", _is_list, "a list", lst)
    return lst[1] if len(lst) > 1 else NIL


def _rest(lst: Any) -> tuple:
    _check("rest", _is_list, "a list", lst)
    return lst[1:]


def _cons(item: Any, lst: Any) -> tuple:
    _check("cons", _is_list, "a list as second argument", lst)
    return (item,) + lst


def _list(*args: Any) -> tuple:
    return tuple(args)


def _append(*args: Any) -> tuple:
    for a in args:
        _check("append", _is_list, "a list", a)
    out: tuple = ()
    for a in args:
        out += a
    return out


def _length(seq: Any) -> int:
    _check("length", lambda v: _is_list(v) or isinstance(v, str), "a list or string", seq)
    return len(seq)


def _nth(index: Any, lst: Any) -> Any:
    _check("nth", lambda v: _is_int(v) and v >= 0, "a nonnegative integer index", index)
    _check("nth", _is_list, "a list", lst)
    return lst[index] if index < len(lst) else NIL


def _concatenate(result_type: Any, *parts: Any) -> str:
    if result_type is not S_STRING:
        raise LispTypeError(f"concatenate: unsupported result type {_show(result_type)}")
    for p in parts:
        _check("concatenate", lambda v: isinstance(v, str), "a string", p)
    return "".join(parts)


def _values(*args: Any) -> Any:
    return Bundle(args)


def _sub_cost(args: tuple) -> int:
    if len(args) == 1:
        return limbs(args[0]) if _is_int(args[0]) else 0
    if not _is_int(args[0]):
        return 0
    return _fold_cost(args[1:], lambda x, y: x - y, args[0])


def _nth_cost(args: tuple) -> int:
    index, lst = args
    if not (_is_int(index) and index >= 0 and _is_list(lst)):
        return 1
    return min(index, len(lst)) + 1


def _len_or_zero(v: Any) -> int:
    return len(v) if isinstance(v, (tuple, str)) else 0


def make_builtins(write: Callable[[str], Any] | None = None) -> dict[Symbol, Builtin]:
    """Build the builtin table; `print` sends its text to `write`."""

    def _print(value: Any) -> Any:
        if write is not None:
            write(print_value(value) + "\n")
        return value

    specs: list[tuple[str, Callable, Callable[[tuple], int], int, int | None]] = [
        ("+", _add, lambda a: _fold_cost(a, lambda x, y: x + y, 0), 0, None),
        ("-", _sub, _sub_cost, 1, None),
        ("*", _mul, lambda a: _fold_cost(a, lambda x, y: x * y, 1), 0, None),
        ("1+", _inc, lambda a: limbs(a[0]) if _is_int(a[0]) else 0, 1, 1),
        ("=", _num_eq, _pairwise_cost, 1, None),
        ("<", _less, _pairwise_cost, 1, None),
        ("first", _first, lambda a: 1, 1, 1),
        ("second", _second, lambda a: 2, 1, 1),
        ("rest", _rest, lambda a: 1, 1, 1),
        ("cons", _cons, lambda a: 1, 2, 2),
        ("list", _list, lambda a: len(a), 0, None),
        ("append", _append, lambda a: sum(_len_or_zero(x) for x in a[:-1]), 0, None),
        ("length", _length, lambda a: _len_or_zero(a[0]), 1, 1),
        ("nth", _nth, _nth_cost, 2, 2),
        ("concatenate", _concatenate, lambda a: sum(_len_or_zero(x) for x in a[1:]), 1, None),
        ("values", _values, lambda a: len(a), 0, None),
        ("print", _print, lambda a: 1, 1, 1),
    ]
    return {
        intern(name): Builtin(name, fn, cost, lo, hi) for name, fn, cost, lo, hi in specs
    }


def install(table: GlobalTable, write: Callable[[str], Any] | None = None) -> GlobalTable:
    table.builtins.update(make_builtins(write))
    return table


def is_function(value: Any) -> bool:
    return isinstance(value, (FunctionObject, Builtin))
