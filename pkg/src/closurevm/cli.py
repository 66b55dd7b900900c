"""Command-line entry point: repl, run, check-transcript, profile, probe."""

from __future__ import annotations

import argparse
import configparser
import io
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

from . import corpus
from .errors import LispError
from .evaluator import Interpreter, on_deep_stack
from .machine import DEFAULT_DEPTH_LIMIT, format_report
from .model import print_value
from .probe import ProbeConfig, ProbeError, parse_sizes, probe_higher_order, probe_membership
from .reader import paren_depth, read_all
from .transcript import TranscriptFormatError, load_transcript, run_transcript

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

def _diagnostic(path: str, exc: LispError) -> str:
    if exc.position is None:
        return f"{path}: {exc.kind}: {exc.message}"
    line, col = exc.position
    return f"{path}:{line}:{col}: {exc.kind}: {exc.message}"


def cmd_repl(interp: Interpreter, stdin: TextIO, stdout: TextIO) -> int:
    interp.out = stdout
    while True:
        stdout.write("> ")
        stdout.flush()
        line = stdin.readline()
        if not line:
            stdout.write("\n")
            return EXIT_OK
        buf = line
        while True:
            depth = paren_depth(buf)
            if depth is not None and depth <= 0:
                break
            more = stdin.readline()
            if not more:
                break
            buf += more
        if not buf.strip():
            continue
        stdout.write(interp.capture(buf) + "\n")
        stdout.flush()


def cmd_run(interp: Interpreter, path: str, stdout: TextIO, stderr: TextIO) -> int:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        stderr.write(f"{path}: cannot read: {exc.strerror}\n")
        return EXIT_ERROR
    interp.out = stdout
    try:
        forms = read_all(text)
        value: Any = None
        for form in forms:
            value = interp.eval_toplevel(form)
    except LispError as exc:
        stderr.write(_diagnostic(path, exc) + "\n")
        return EXIT_ERROR
    if forms:
        stdout.write(print_value(value) + "\n")
    return EXIT_OK


def cmd_check_transcript(
    paths: Sequence[str], depth_limit: int, stdout: TextIO, stderr: TextIO
) -> int:
    files = [Path(p) for p in paths] if paths else corpus.session_files()
    if not files:
        stderr.write("no transcript files\n")
        return EXIT_ERROR
    cases = []
    for f in files:
        try:
            cases.append((f, load_transcript(f)))
        except OSError as exc:
            stderr.write(f"{f}: cannot read: {exc.strerror}\n")
            return EXIT_ERROR
        except TranscriptFormatError as exc:
            stderr.write(f"format error: {exc}\n")
            return EXIT_ERROR
    status = EXIT_OK
    for f, case in cases:
        mismatch = run_transcript(case, Interpreter(depth_limit, out=io.StringIO()))
        if mismatch is None:
            stdout.write(f"PASS {f} ({len(case.steps)} steps)\n")
        else:
            stdout.write(f"FAIL {f} {mismatch}\n")
            status = EXIT_FAIL
    return status


def cmd_profile(interp: Interpreter, path: str, stdout: TextIO, stderr: TextIO) -> int:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        stderr.write(f"{path}: cannot read: {exc.strerror}\n")
        return EXIT_ERROR
    interp.out = io.StringIO()
    try:
        interp.load(text)
    except LispError as exc:
        stderr.write(_diagnostic(path, exc) + "\n")
        return EXIT_ERROR
    stdout.write(format_report(interp.machine.counters))
    return EXIT_OK


# -- probe families -------------------------------------------------------------


class FamilyError(Exception):
    pass


def _resolve(name: str, base: Path, fallback) -> Path:
    p = Path(name)
    if p.is_absolute():
        return p
    local = base / p
    return local if local.exists() else fallback(name)


def load_family(path: str) -> tuple[Path, configparser.ConfigParser]:
    p = Path(path)
    if not p.exists():
        candidate = corpus.family_path(path)
        if candidate.exists():
            p = candidate
        else:
            raise FamilyError(f"{path}: no such family file")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(p.read_text(encoding="utf-8"), source=str(p))
    except configparser.Error as exc:
        raise FamilyError(f"{p}: {exc}") from None
    if not parser.has_section("family"):
        raise FamilyError(f"{p}: missing [family] section")
    return p, parser


def _lines(value: str) -> list[str]:
    return [v.strip() for v in value.strip().splitlines() if v.strip()]


def cmd_probe(
    interp: Interpreter,
    family_file: str,
    args: argparse.Namespace,
    stdout: TextIO,
    stderr: TextIO,
) -> int:
    try:
        path, cfg = load_family(family_file)
        fam = cfg["family"]
        programs = fam.get("programs", "").split()
        input_kind = fam.get("input", "list")
        member_exprs = _lines(fam.get("members", ""))
        if not member_exprs:
            raise FamilyError(f"{path}: no members")
        sizes = parse_sizes(args.sizes or fam.get("sizes", "2..256"))
        samples = args.samples_per_size or fam.getint("samples-per-size", 8)
        degree_max = args.degree_max if args.degree_max is not None else fam.getint("degree-max", 4)
        config = ProbeConfig(
            seed=args.seed,
            degree_max=degree_max,
            chi_degree_max=args.chi_degree_max,
            sizes=sizes,
            samples_per_size=samples,
        )
        degree = fam.getint("degree") if "degree" in fam else None
    except (FamilyError, ValueError) as exc:
        stderr.write(f"{exc}\n")
        return EXIT_ERROR
    interp.out = io.StringIO()
    try:
        for prog in programs:
            prog_path = _resolve(prog, path.parent, corpus.program_path)
            interp.load(prog_path.read_text(encoding="utf-8"))
        members = [(expr, interp.load(expr)) for expr in member_exprs]
        if cfg.has_section("transform"):
            tr = cfg["transform"]
            alpha = interp.load(tr["alpha"])
            report = probe_higher_order(
                interp,
                alpha,
                members,
                degree if degree is not None else 1,
                config,
                input_kind,
                tr.get("output-input", input_kind),
            )
        else:
            report = probe_membership(interp, members, input_kind, config, degree)
    except (LispError, ProbeError, OSError, KeyError, ValueError) as exc:
        stderr.write(f"{path}: probe failed: {exc}\n")
        return EXIT_ERROR
    stdout.write(report.format())
    return EXIT_OK if report.passed else EXIT_FAIL


# -- argument parsing ---------------------------------------------------------------


def _natural(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_natural, default=42)
    common.add_argument("--degree-max", type=_natural, default=None)
    common.add_argument("--chi-degree-max", type=_natural, default=3)
    common.add_argument("--sizes", default=None, help="doubling ladder lo..hi or a comma list (default 2..256)")
    common.add_argument("--samples-per-size", type=_positive, default=None)
    common.add_argument("--depth-limit", type=_positive, default=DEFAULT_DEPTH_LIMIT)

    parser = argparse.ArgumentParser(prog="closurevm", description="Instrumented closure interpreter.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("repl", parents=[common], help="interactive session")
    p = sub.add_parser("run", parents=[common], help="evaluate a program file")
    p.add_argument("file")
    p = sub.add_parser("check-transcript", parents=[common], help="replay golden transcripts")
    p.add_argument("files", nargs="*", help="transcript files (default: bundled sessions)")
    p = sub.add_parser("profile", parents=[common], help="run a program and report step counters")
    p.add_argument("file")
    p = sub.add_parser("probe", parents=[common], help="polynomiality probe over a family file")
    p.add_argument("family")
    return parser


def dispatch(args: argparse.Namespace, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    if args.command == "check-transcript":
        return cmd_check_transcript(args.files, args.depth_limit, stdout, stderr)
    interp = Interpreter(args.depth_limit, out=stdout)
    if args.command == "repl":
        return cmd_repl(interp, stdin, stdout)
    if args.command == "run":
        return cmd_run(interp, args.file, stdout, stderr)
    if args.command == "profile":
        return cmd_profile(interp, args.file, stdout, stderr)
    if args.command == "probe":
        return cmd_probe(interp, args.family, args, stdout, stderr)
    raise AssertionError(args.command)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    # One worker thread for the whole command instead of one per form.
    status = on_deep_stack(lambda: dispatch(args, sys.stdin, sys.stdout, sys.stderr))
    sys.stdout.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
