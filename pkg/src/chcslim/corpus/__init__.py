"""Bundled mini-corpus of clause programs for tests and demos."""

from __future__ import annotations

from pathlib import Path

from ..parser import parse_program
from ..syntax import Program


def corpus_dir() -> Path:
    return Path(__file__).resolve().parent


def corpus_paths() -> list[Path]:
    return sorted(corpus_dir().glob("*.clp"))


def corpus_names() -> list[str]:
    return [p.stem for p in corpus_paths()]


def load(name: str) -> Program:
    path = corpus_dir() / f"{name}.clp"
    return parse_program(path.read_text())