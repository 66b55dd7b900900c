import io
import subprocess
import sys

import pytest

from closurevm import corpus
from closurevm.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, main


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_run_monoid_kit(capsys):
    status, out, _ = run(capsys, "run", str(corpus.program_path("monoid-kit")))
    assert (status, out) == (EXIT_OK, '("qwertyuiop" 9)\n')


def test_run_empty_and_unbalanced(capsys, tmp_path):
    empty = tmp_path / "empty.fl"
    empty.write_text("")
    assert run(capsys, "run", str(empty))[:2] == (EXIT_OK, "")
    bad = tmp_path / "bad.fl"
    bad.write_text("(+ 1 2)\n(+ 1\n")
    status, _, err = run(capsys, "run", str(bad))
    assert status == EXIT_ERROR and f"{bad}:2:1: read-error" in err


def test_check_transcript(capsys, tmp_path):
    status, out, _ = run(capsys, "check-transcript")
    assert status == EXIT_OK and out.count("PASS") == 8
    corrupt = tmp_path / "genmul.txt"
    corrupt.write_text(
        next(f for f in corpus.session_files() if f.stem == "s07_genmul").read_text().replace("\n45\n", "\n46\n")
    )
    status, out, _ = run(capsys, "check-transcript", str(corrupt))
    assert status == EXIT_FAIL and "expected: 46" in out
    assert run(capsys, "check-transcript", str(tmp_path / "missing.txt"))[0] == EXIT_ERROR


def test_profile(capsys, tmp_path):
    status, out, _ = run(capsys, "profile", str(corpus.program_path("genmul-driver")))
    assert status == EXIT_OK
    lines = [line for line in out.splitlines() if line.startswith("site ") and "generations=4" in line]
    assert len(lines) == 1
    failing = tmp_path / "fail.fl"
    failing.write_text("(+ 1 2)\n(funcall 5)\n")
    status, out, err = run(capsys, "profile", str(failing))
    assert status == EXIT_ERROR and out == "" and "not-a-function" in err


def test_probe_exit_codes(capsys, tmp_path):
    status, out, _ = run(capsys, "probe", "list-length", "--sizes", "2..32")
    assert status == EXIT_OK and "verdict=pass" in out
    status, out, _ = run(capsys, "probe", "doubling-recursion", "--samples-per-size", "2")
    assert status == EXIT_FAIL and "verdict=fail" in out
    broken = tmp_path / "broken.ini"
    broken.write_text("[family]\nprograms = list-length.fl\nmembers = no-such-function\n")
    assert run(capsys, "probe", str(broken))[0] == EXIT_ERROR


def test_rejects_bad_options(capsys):
    with pytest.raises(SystemExit):
        main(["probe", "list-length", "--samples-per-size", "0"])


def test_repl_session():
    proc = subprocess.run(
        [sys.executable, "-m", "closurevm", "repl"],
        input="(setq mul3 (lambda (n) (* n 3)))\n(funcall mul3 5)\n(\n+ 1 2)\n(funcall 5 5)\n(+ 2 2)\n",
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0
    outputs = [chunk.strip() for chunk in proc.stdout.split("> ") if chunk.strip()]
    assert outputs[:3] == ["#<Function 1>", "15", "3"]
    assert outputs[3].startswith("error: not-a-function") and outputs[4] == "4"
