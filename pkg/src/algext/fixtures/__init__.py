"""Theories and models shipped with the package (also used by the tests)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

THEORIES = ("noop", "n2", "idem", "free_unary", "map", "monoid", "act")
HOM_FINITE = ("noop", "n2", "idem", "map", "monoid", "act")


def path(name: str) -> Path:
    return Path(str(resources.files(__name__) / name))


def theory(name: str):
    from ..dsl import parse_theory

    return parse_theory(path(f"{name}.thy").read_text(encoding="utf-8"))
