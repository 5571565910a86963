"""Surface language: parsing, macro expansion and type checking."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ..ir import CoreSpec
from .expand import Expanded, expand_macros
from .syntax import Program, parse, show
from .typecheck import type_check


@lru_cache(maxsize=1)
def stdlib() -> Program:
    text = resources.files(__package__).joinpath("stdlib.spec").read_text(encoding="utf-8")
    return parse(text)


def compile_spec(text: str, use_stdlib: bool = True) -> CoreSpec:
    """Parse, expand and type check ``text``; the result is not yet flattened."""
    program = parse(text)
    expanded = expand_macros(program, stdlib() if use_stdlib else None)
    return type_check(expanded)


__all__ = ["parse", "show", "expand_macros", "type_check", "compile_spec", "stdlib", "Expanded", "Program"]
