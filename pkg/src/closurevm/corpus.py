"""Locating the bundled corpus of sessions, programs and probe families."""

from __future__ import annotations

import os
from pathlib import Path

ENV_VAR = "CLOSUREVM_CORPUS"
_BUNDLED = Path(__file__).resolve().parent / "corpus"


def corpus_dir() -> Path:
    override = os.environ.get(ENV_VAR)
    return Path(override) if override else _BUNDLED


def session_files() -> list[Path]:
    return sorted((corpus_dir() / "sessions").glob("*.txt"))


def program_path(name: str) -> Path:
    if not name.endswith(".fl"):
        name += ".fl"
    return corpus_dir() / "programs" / name


def program_text(*names: str) -> str:
    return "\n".join(program_path(n).read_text(encoding="utf-8") for n in names)


def family_path(name: str) -> Path:
    if not name.endswith(".ini"):
        name += ".ini"
    return corpus_dir() / "families" / name
