"""Golden transcripts: REPL sessions replayed and compared line by line.

Format: a line starting with ``> `` opens an input; following lines belong
to the input until its parentheses balance; the lines after that, up to
the next ``> `` line, are the expected output. Lines starting with ``;``
outside inputs are comments. In expected output ``#<Function _>`` and
``#<Closure _>`` match any id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import LispError
from .evaluator import Interpreter
from .reader import paren_depth

PROMPT = "> "
_WILDCARD = re.compile(r"#<(Function|Closure) _>")


class TranscriptFormatError(Exception):
    def __init__(self, message: str, path: str = "<transcript>", line: int | None = None):
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")
        self.line = line


@dataclass(frozen=True)
class Step:
    input: str
    expected: str
    line: int


@dataclass(frozen=True)
class TranscriptCase:
    name: str
    steps: tuple[Step, ...]


@dataclass(frozen=True)
class Mismatch:
    step: int
    input: str
    expected: str
    actual: str

    def __str__(self) -> str:
        return (
            f"step {self.step}: {self.input.splitlines()[0]}\n"
            f"  expected: {self.expected}\n"
            f"  actual:   {self.actual}"
        )


def parse_transcript(text: str, name: str = "<transcript>") -> TranscriptCase:
    lines = text.splitlines()
    steps: list[Step] = []
    i = 0
    while i < len(lines):
        line = lines[i]
        if not line.startswith(PROMPT):
            if line.strip() and not line.lstrip().startswith(";"):
                raise TranscriptFormatError("text before the first '> ' input", name, i + 1)
            i += 1
            continue
        start = i + 1
        buf = [line[len(PROMPT):]]
        i += 1
        while True:
            depth = paren_depth("\n".join(buf))
            if depth is not None and depth <= 0:
                break
            if i >= len(lines):
                raise TranscriptFormatError("input never balances its parentheses", name, start)
            if lines[i].startswith(PROMPT):
                raise TranscriptFormatError("new input before the previous one balanced", name, i + 1)
            buf.append(lines[i])
            i += 1
        expected = []
        while i < len(lines) and not lines[i].startswith(PROMPT):
            if not lines[i].lstrip().startswith(";"):
                expected.append(lines[i].rstrip())
            i += 1
        while expected and not expected[-1]:
            expected.pop()
        steps.append(Step("\n".join(buf), "\n".join(expected), start))
    return TranscriptCase(name, tuple(steps))


def load_transcript(path: str | Path) -> TranscriptCase:
    path = Path(path)
    return parse_transcript(path.read_text(encoding="utf-8"), path.stem)


def pattern_matches(expected: str, actual: str) -> bool:
    pieces = _WILDCARD.split(expected)
    # split() with one group yields literal, kind, literal, kind, ...
    regex = []
    for k, piece in enumerate(pieces):
        if k % 2 == 0:
            regex.append(re.escape(piece))
        else:
            regex.append(rf"#<{piece} [^>\s]+>")
    return re.fullmatch("".join(regex), actual) is not None


def run_transcript(case: TranscriptCase, interp: Interpreter | None = None) -> Mismatch | None:
    """Replay every step in one instance; None means every step matched."""
    interp = interp if interp is not None else Interpreter()
    for k, step in enumerate(case.steps, start=1):
        try:
            actual = interp.capture(step.input)
        except LispError as exc:  # reader errors surface as output too
            actual = f"error: {exc}"
        if not pattern_matches(step.expected, actual):
            return Mismatch(k, step.input, step.expected, actual)
    return None


def replay(case: TranscriptCase, interp: Interpreter | None = None) -> list[str]:
    """Actual outputs of every step, for reports and determinism checks."""
    interp = interp if interp is not None else Interpreter()
    out = []
    for step in case.steps:
        try:
            out.append(interp.capture(step.input))
        except LispError as exc:
            out.append(f"error: {exc}")
    return out
