"""Interned symbols."""

from __future__ import annotations

import threading


class Symbol:
    """An interned name. Identity decides equality."""

    __slots__ = ("id", "name")

    def __init__(self, id: int, name: str):
        self.id = id
        self.name = name

    def __repr__(self) -> str:
        return f"Symbol({self.name!r})"


class SymbolTable:
    def __init__(self) -> None:
        self._by_name: dict[str, Symbol] = {}
        self._lock = threading.Lock()

    def intern(self, name: str) -> Symbol:
        key = name.lower()
        sym = self._by_name.get(key)
        if sym is None:
            with self._lock:
                sym = self._by_name.get(key)
                if sym is None:
                    sym = Symbol(len(self._by_name) + 1, key)
                    self._by_name[key] = sym
        return sym

    def __len__(self) -> int:
        return len(self._by_name)


# Process-wide store used by the reader. Symbols carry no values, so sharing
# the store between interpreter instances shares no mutable program state.
SYMBOLS = SymbolTable()


def intern(name: str, table: SymbolTable = SYMBOLS) -> Symbol:
    return table.intern(name)
