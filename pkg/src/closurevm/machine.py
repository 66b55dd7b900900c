"""Explicit activation stack and phase-partitioned step counters.

Costs are abstract, deterministic steps. Every charge lands in exactly one
phase counter and in ``eval_steps``, so

    eval_steps == dispatch_steps + prepare_steps + generation_steps + call_steps

holds after any amount of work.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any

from .errors import StackOverflow

EVAL = "eval"
PREPARE = "prepare"
GENERATE = "generate"
CALL = "call"
PHASES = (EVAL, PREPARE, GENERATE, CALL)

DEFAULT_DEPTH_LIMIT = 10_000


@dataclass(frozen=True)
class ActivationRecord:
    return_descriptor: Any
    callee: Any
    argument_refs: tuple


@dataclass
class CostCounters:
    eval_steps: int = 0
    dispatch_steps: int = 0
    prepare_steps: int = 0
    generation_steps: int = 0
    call_steps: int = 0
    closure_generations: int = 0
    function_generations: int = 0
    frame_pushes: int = 0
    cell_allocations: int = 0
    # site-id -> [generations, generation_steps]
    sites: dict[int, list[int]] = field(default_factory=dict)

    def copy(self) -> CostCounters:
        return replace(self, sites={k: list(v) for k, v in self.sites.items()})

    def scalar_items(self) -> list[tuple[str, int]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self) if f.name != "sites"]


def counters_snapshot(machine: Machine) -> CostCounters:
    return machine.counters.copy()


def counters_diff(before: CostCounters, after: CostCounters) -> CostCounters:
    out = CostCounters()
    for name, value in after.scalar_items():
        delta = value - getattr(before, name)
        if delta < 0:
            raise ValueError(f"counters_diff: {name} decreased ({getattr(before, name)} -> {value})")
        setattr(out, name, delta)
    for site, (gens, steps) in after.sites.items():
        g0, s0 = before.sites.get(site, (0, 0))
        if gens < g0 or steps < s0:
            raise ValueError(f"counters_diff: site {site} decreased")
        if gens > g0:
            out.sites[site] = [gens - g0, steps - s0]
    return out


class Machine:
    def __init__(self, depth_limit: int = DEFAULT_DEPTH_LIMIT):
        if depth_limit < 1:
            raise ValueError("depth limit must be positive")
        self.stack: list[ActivationRecord] = []
        self.counters = CostCounters()
        self.depth_limit = depth_limit
        self.phase = EVAL

    @property
    def depth(self) -> int:
        return len(self.stack)

    def push_frame(self, record: ActivationRecord) -> None:
        if len(self.stack) >= self.depth_limit:
            raise StackOverflow(f"stack depth limit {self.depth_limit} exceeded")
        self.stack.append(record)
        self.counters.frame_pushes += 1

    def pop_frame(self) -> ActivationRecord:
        if not self.stack:
            raise RuntimeError("pop_frame on an empty activation stack")
        return self.stack.pop()

    def unwind(self, depth: int) -> None:
        del self.stack[depth:]

    def charge(self, phase: str, amount: int) -> None:
        if amount < 1:
            raise ValueError("charge amount must be at least 1")
        c = self.counters
        c.eval_steps += amount
        if phase == EVAL:
            c.dispatch_steps += amount
        elif phase == CALL:
            c.call_steps += amount
        elif phase == PREPARE:
            c.prepare_steps += amount
        elif phase == GENERATE:
            c.generation_steps += amount
        else:
            raise ValueError(f"unknown phase {phase!r}")

    def step(self, amount: int = 1) -> None:
        """Charge `amount` to whichever phase is current."""
        self.charge(self.phase, amount)

    def record_generation(self, site_id: int, closure: bool, cost: int) -> None:
        self.charge(GENERATE, cost)
        c = self.counters
        if closure:
            c.closure_generations += 1
        else:
            c.function_generations += 1
        entry = c.sites.setdefault(site_id, [0, 0])
        entry[0] += 1
        entry[1] += cost


def push_frame(machine: Machine, record: ActivationRecord) -> None:
    machine.push_frame(record)


def pop_frame(machine: Machine) -> ActivationRecord:
    return machine.pop_frame()


def charge(machine: Machine, phase: str, amount: int) -> None:
    machine.charge(phase, amount)


def format_report(counters: CostCounters) -> str:
    lines = [f"{name}={value}" for name, value in counters.scalar_items()]
    for site in sorted(counters.sites):
        gens, steps = counters.sites[site]
        per = steps // gens if steps % gens == 0 else f"{steps}/{gens}"
        lines.append(f"site {site} generations={gens} steps_per_generation={per}")
    return "\n".join(lines) + "\n"
