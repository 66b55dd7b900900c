"""Empirical polynomiality probe.

A function f is in P^d_c when every measured call satisfies
``steps <= c * (1 + size)**d``. A transform alpha is polynomial when, for a
fixed d, one d' and one polynomial chi bound every alpha(f) by
``P^{d'}_{chi(c)}``.

Everything here works on finitely many sampled inputs. Degrees are
accepted only if a coefficient fitted on the smaller inputs also bounds
the larger, held-out ones, so a probe can refute polynomiality or fail to
refute it. It never proves anything.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .errors import LispError
from .evaluator import Interpreter, collapse, on_deep_stack
from .machine import counters_diff, counters_snapshot
from .model import Builtin, Bundle, FunctionObject
from .symbols import Symbol

REPORT_HEADER = "# empirical probe: sampled inputs can refute polynomiality, never prove it"


class ProbeError(Exception):
    """A family member or transform failed to evaluate."""


def size_of(value: Any) -> int:
    if isinstance(value, Bundle):
        raise TypeError("size_of: multiple values have no size")
    if isinstance(value, bool):
        raise TypeError("size_of: not a language value")
    if isinstance(value, int):
        return 1 + abs(value).bit_length()
    if isinstance(value, str):
        return 1 + len(value)
    if isinstance(value, tuple):
        return 1 + sum(size_of(v) for v in value)
    if isinstance(value, (FunctionObject, Builtin, Symbol)):
        return 1
    raise TypeError(f"size_of: not a language value: {value!r}")


def args_size(args: Sequence[Any]) -> int:
    """Size of an argument list: the argument itself for unary calls."""
    if len(args) == 1:
        return size_of(args[0])
    return size_of(tuple(args))


@dataclass(frozen=True, order=True)
class Sample:
    size: int
    steps: int


@dataclass(frozen=True)
class PolyMembership:
    degree: int
    coefficient: Fraction
    witnessed: bool


def measure(interp: Interpreter, fn: Any, args: Sequence[Any]) -> Sample:
    """Steps of exactly one call of `fn`, counted from a counter snapshot."""
    machine = interp.machine
    depth = machine.depth
    before = counters_snapshot(machine)
    try:
        interp.apply(fn, list(args))
    except LispError as exc:
        raise ProbeError(f"evaluation failed: {exc}") from exc
    except RecursionError as exc:
        raise ProbeError("evaluation exceeded the host recursion limit") from exc
    finally:
        machine.unwind(depth)
    diff = counters_diff(before, counters_snapshot(machine))
    return Sample(args_size(args), diff.eval_steps)


def min_coefficient(samples: Sequence[Sample], d: int) -> Fraction:
    if not samples:
        raise ValueError("min_coefficient needs at least one sample")
    return max(Fraction(s.steps, (1 + s.size) ** d) for s in samples)


def check_membership(samples: Sequence[Sample], c: Fraction, d: int) -> bool:
    return all(s.steps <= c * (1 + s.size) ** d for s in samples)


def split_samples(samples: Sequence[Sample]) -> tuple[list[Sample], list[Sample]]:
    """Training half (smaller inputs) and held-out half (larger inputs)."""
    ordered = sorted(samples)
    if len(ordered) < 2:
        return ordered, ordered
    k = len(ordered) // 2
    return ordered[:k], ordered[k:]


def held_out_membership(samples: Sequence[Sample], d: int) -> PolyMembership:
    """Fit c on the smaller inputs and test it on the larger ones."""
    train, test = split_samples(samples)
    c = min_coefficient(train, d)
    return PolyMembership(d, c, check_membership(test, c, d))


def smallest_degree(sample_sets: Sequence[Sequence[Sample]], degree_max: int) -> int | None:
    for d in range(degree_max + 1):
        if all(held_out_membership(s, d).witnessed for s in sample_sets):
            return d
    return None


# -- input generation ----------------------------------------------------------


def _int_of_bits(rng: random.Random, bits: int) -> int:
    if bits <= 0:
        return 0
    return rng.getrandbits(bits) | (1 << (bits - 1))


def _list_input(rng: random.Random, size: int) -> list[Any]:
    return [tuple(rng.randint(0, 9) for _ in range(size))]


def _integer_input(rng: random.Random, size: int) -> list[Any]:
    return [_int_of_bits(rng, size)]


def _integer_pair_input(rng: random.Random, size: int) -> list[Any]:
    return [_int_of_bits(rng, size), _int_of_bits(rng, size)]


def _item_pair_input(rng: random.Random, size: int) -> list[Any]:
    return [
        (_int_of_bits(rng, size), _int_of_bits(rng, size)),
        (_int_of_bits(rng, size), _int_of_bits(rng, size)),
    ]


INPUT_KINDS: dict[str, Callable[[random.Random, int], list[Any]]] = {
    "list": _list_input,
    "integer": _integer_input,
    "integer-pair": _integer_pair_input,
    "item-pair": _item_pair_input,
}


def doubling_ladder(lo: int, hi: int) -> tuple[int, ...]:
    if lo < 1 or hi < lo:
        raise ValueError(f"bad size ladder {lo}..{hi}")
    sizes = []
    s = lo
    while s <= hi:
        sizes.append(s)
        s *= 2
    return tuple(sizes)


def parse_sizes(text: str) -> tuple[int, ...]:
    """`lo..hi` is a doubling ladder; `a,b,c` lists sizes explicitly."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return doubling_ladder(int(lo), int(hi))
    sizes = tuple(int(p) for p in text.split(",") if p.strip())
    if not sizes or min(sizes) < 1:
        raise ValueError(f"bad size list {text!r}")
    return sizes


@dataclass(frozen=True)
class ProbeConfig:
    seed: int = 42
    degree_max: int = 4
    chi_degree_max: int = 3
    sizes: tuple[int, ...] = field(default_factory=lambda: doubling_ladder(2, 256))
    samples_per_size: int = 8


def generate_inputs(kind: str, config: ProbeConfig, stream: int = 0) -> list[list[Any]]:
    try:
        make = INPUT_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown input kind {kind!r}; known: {', '.join(INPUT_KINDS)}") from None
    rng = random.Random(config.seed * 1_000_003 + stream)
    return [make(rng, size) for size in config.sizes for _ in range(config.samples_per_size)]


def measure_all(interp: Interpreter, fn: Any, inputs: Sequence[Sequence[Any]]) -> list[Sample]:
    return on_deep_stack(lambda: [measure(interp, fn, args) for args in inputs])


# -- reports ---------------------------------------------------------------------


def fmt_rational(q: Fraction | None) -> str:
    if q is None:
        return "none"
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Chi:
    """Upper envelope c_out <= a * c_in**e + b."""

    a: Fraction
    e: int
    b: Fraction

    def __call__(self, c: Fraction) -> Fraction:
        return self.a * c**self.e + self.b

    def __str__(self) -> str:
        return f"{fmt_rational(self.a)}*c^{self.e}+{fmt_rational(self.b)}"


def fit_chi(pairs: Sequence[tuple[Fraction, Fraction]], chi_degree_max: int) -> Chi | None:
    """Smallest-exponent monomial-plus-constant envelope valid on all pairs.

    For each exponent e the line a*x + b (x = c_in**e) is fitted on the half
    of the pairs with smaller c_in: a is the steepest secant slope, b the
    least intercept keeping every training pair under the line. The
    envelope is accepted only if the held-out pairs also lie under it.
    """
    if not pairs:
        return None
    ordered = sorted(pairs)
    k = max(1, (len(ordered) + 1) // 2)
    train = ordered[:k]
    for e in range(chi_degree_max + 1):
        xs = [(c_in**e, c_out) for c_in, c_out in train]
        a = Fraction(0)
        for i, (x1, y1) in enumerate(xs):
            for x2, y2 in xs[i + 1 :]:
                if x2 != x1:
                    a = max(a, (y2 - y1) / (x2 - x1))
        b = max(y - a * x for x, y in xs)
        chi = Chi(a, e, b)
        if all(c_out <= chi(c_in) for c_in, c_out in ordered):
            return chi
    return None


@dataclass(frozen=True)
class MemberResult:
    name: str
    c_in: Fraction | None
    c_out: Fraction | None = None


@dataclass(frozen=True)
class MembershipReport:
    degree: int | None
    members: tuple[MemberResult, ...]

    @property
    def passed(self) -> bool:
        return self.degree is not None

    def format(self) -> str:
        lines = [
            REPORT_HEADER,
            "mode=membership",
            f"degree_d={'none' if self.degree is None else self.degree}",
            "degree_dprime=none",
            "chi=none",
            f"verdict={'pass' if self.passed else 'fail'}",
        ]
        for m in self.members:
            lines.append(f"member={m.name} c_in={fmt_rational(m.c_in)} c_out=none")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class HigherOrderReport:
    degree: int
    degree_prime: int | None
    chi: Chi | None
    members: tuple[MemberResult, ...]

    @property
    def passed(self) -> bool:
        return self.degree_prime is not None and self.chi is not None

    @property
    def evidence(self) -> list[tuple[Fraction, Fraction]]:
        return [(m.c_in, m.c_out) for m in self.members if m.c_in is not None and m.c_out is not None]

    def format(self) -> str:
        lines = [
            REPORT_HEADER,
            "mode=higher-order",
            f"degree_d={self.degree}",
            f"degree_dprime={'none' if self.degree_prime is None else self.degree_prime}",
            f"chi={'none' if self.chi is None else self.chi}",
            f"verdict={'pass' if self.passed else 'fail'}",
        ]
        for m in self.members:
            lines.append(
                f"member={m.name} c_in={fmt_rational(m.c_in)} c_out={fmt_rational(m.c_out)}"
            )
        return "\n".join(lines) + "\n"


# -- probes ----------------------------------------------------------------------


def probe_membership(
    interp: Interpreter,
    family: Sequence[tuple[str, Any]],
    input_kind: str,
    config: ProbeConfig,
    degree: int | None = None,
) -> MembershipReport:
    """Smallest d (or the given one) putting every member in some P^d_c."""
    if not family:
        raise ValueError("empty family")
    inputs = generate_inputs(input_kind, config)
    sample_sets = [measure_all(interp, fn, inputs) for _, fn in family]
    if degree is None:
        found = smallest_degree(sample_sets, config.degree_max)
    else:
        ok = all(held_out_membership(s, degree).witnessed for s in sample_sets)
        found = degree if ok else None
    members = tuple(
        MemberResult(name, min_coefficient(s, found) if found is not None else None)
        for (name, _), s in zip(family, sample_sets)
    )
    return MembershipReport(found, members)


def probe_higher_order(
    interp: Interpreter,
    alpha: Any,
    family: Sequence[tuple[str, Any]],
    d: int,
    config: ProbeConfig,
    input_kind: str,
    output_kind: str | None = None,
) -> HigherOrderReport:
    if not family:
        raise ValueError("empty family")
    output_kind = output_kind or input_kind
    inputs = generate_inputs(input_kind, config, stream=0)
    out_inputs = generate_inputs(output_kind, config, stream=1)
    c_ins = []
    out_sets = []
    for name, fn in family:
        c_ins.append(min_coefficient(measure_all(interp, fn, inputs), d))
        depth = interp.machine.depth
        try:
            g = collapse(on_deep_stack(lambda: interp.apply(alpha, [fn])))
        except LispError as exc:
            raise ProbeError(f"transform failed on {name}: {exc}") from exc
        finally:
            interp.machine.unwind(depth)
        if not isinstance(g, (FunctionObject, Builtin)):
            raise ProbeError(f"transform returned a non-function for {name}")
        out_sets.append(measure_all(interp, g, out_inputs))
    d_prime = smallest_degree(out_sets, config.degree_max)
    if d_prime is None:
        members = tuple(MemberResult(name, c) for (name, _), c in zip(family, c_ins))
        return HigherOrderReport(d, None, None, members)
    c_outs = [min_coefficient(s, d_prime) for s in out_sets]
    members = tuple(MemberResult(name, ci, co) for (name, _), ci, co in zip(family, c_ins, c_outs))
    chi = fit_chi(list(zip(c_ins, c_outs)), config.chi_degree_max)
    return HigherOrderReport(d, d_prime, chi, members)
