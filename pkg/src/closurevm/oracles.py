"""Native reference implementations checked against the in-language corpus."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Iterator


@dataclass(frozen=True)
class Simplex:
    """An n-simplex of K(Z,1): a list of n integers."""

    dim: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.dim < 0 or len(self.entries) != self.dim:
            raise ValueError(f"simplex of dimension {self.dim} needs {self.dim} entries")

    def as_value(self) -> tuple:
        return (self.dim, self.entries)

    @classmethod
    def from_value(cls, value: Any) -> Simplex:
        dim, entries = value
        return cls(dim, tuple(entries))


def face_kz1(s: Simplex, i: int) -> Simplex:
    n = s.dim
    if n < 1:
        raise ValueError("a 0-simplex has no faces")
    if not 0 <= i <= n:
        raise IndexError(f"face index {i} out of range 0..{n}")
    e = s.entries
    if i == 0:
        out = e[1:]
    elif i == n:
        out = e[:-1]
    else:
        out = e[: i - 1] + (e[i - 1] + e[i],) + e[i + 1 :]
    return Simplex(n - 1, out)


def random_simplex(rng: random.Random, max_dim: int, magnitude: int) -> Simplex:
    if max_dim < 1:
        raise ValueError("max_dim must be at least 1")
    dim = rng.randint(1, max_dim)
    return Simplex(dim, tuple(rng.randint(-magnitude, magnitude) for _ in range(dim)))


def simplicial_identity_pairs(dim: int) -> Iterator[tuple[int, int]]:
    """All (i, j) with i < j for which both sides of d_i d_j = d_{j-1} d_i exist."""
    if dim < 2:
        return
    for j in range(1, dim + 1):
        for i in range(j):
            yield i, j


def check_simplicial_identities(s: Simplex) -> list[tuple[int, int]]:
    """Return the (i, j) pairs violating d_i d_j = d_{j-1} d_i (empty if none)."""
    bad = []
    for i, j in simplicial_identity_pairs(s.dim):
        if face_kz1(face_kz1(s, j), i) != face_kz1(face_kz1(s, i), j - 1):
            bad.append((i, j))
    return bad


# -- monoids ------------------------------------------------------------------


@dataclass(frozen=True)
class MonoidOracle:
    name: str
    identity: Any
    operation: Callable[[Any, Any], Any]
    element: Callable[[random.Random], Any]


def monoid_product_native(m1: MonoidOracle, m2: MonoidOracle) -> MonoidOracle:
    def op(x: Any, y: Any) -> Any:
        if not (isinstance(x, tuple) and len(x) == 2 and isinstance(y, tuple) and len(y) == 2):
            raise TypeError(f"product of {m1.name} and {m2.name}: elements must be pairs")
        return (m1.operation(x[0], y[0]), m2.operation(x[1], y[1]))

    return MonoidOracle(
        f"{m1.name}_x_{m2.name}",
        (m1.identity, m2.identity),
        op,
        lambda rng: (m1.element(rng), m2.element(rng)),
    )


def _random_string(rng: random.Random) -> str:
    return "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randint(0, 6)))


N_PLUS = MonoidOracle("N+", 0, lambda a, b: a + b, lambda rng: rng.randint(0, 1000))
N_TIMES = MonoidOracle("N*", 1, lambda a, b: a * b, lambda rng: rng.randint(0, 1000))
CS = MonoidOracle("CS", "", lambda a, b: a + b, _random_string)


def monoid_laws_hold(m: MonoidOracle, a: Any, b: Any, c: Any) -> bool:
    op, e = m.operation, m.identity
    return op(e, a) == a == op(a, e) and op(op(a, b), c) == op(a, op(b, c))
