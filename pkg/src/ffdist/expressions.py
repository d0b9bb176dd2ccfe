"""A tiny sumset-expression language over a base set A.

Terms are ``A`` or ``(A-A)``, optionally squared elementwise (``^2``), with an
optional repetition ``xN``; terms are joined by ``+``.  ``Δ(A^d)`` (or
``Delta(A^d)``) abbreviates ``(A-A)^2 xd``.  Whitespace is ignored, and the
unicode forms ``−``, ``×`` and ``²`` are accepted.

    >>> str(parse_expression("(A−A)^2 + A^2 ×4"))
    '(A-A)^2 + A^2 x4'
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ConfigError

__all__ = ["Term", "SumExpression", "parse_expression"]

_TERM = re.compile(
    r"(?:(?:Δ|Delta)\(A\^(?P<dim>\d+)\))"
    r"|(?:(?P<base>\(A-A\)|A-A|\(A\)|A)(?P<sq>\^2|²)?)"
)
_REP = re.compile(r"(?:[x×*])(?P<rep>\d+)$")


@dataclass(frozen=True)
class Term:
    base: str  # "A" or "A-A"
    squared: bool = False
    count: int = 1

    def __post_init__(self):
        if self.base not in ("A", "A-A"):
            raise ConfigError(f"unknown base {self.base!r}")
        if self.count < 1:
            raise ConfigError("repetition count must be >= 1")

    def __str__(self) -> str:
        core = "A" if self.base == "A" else "(A-A)"
        if self.squared:
            core += "^2"
        return core if self.count == 1 else f"{core} x{self.count}"


@dataclass(frozen=True)
class SumExpression:
    terms: tuple[Term, ...]

    def __post_init__(self):
        if not self.terms:
            raise ConfigError("expression needs at least one term")

    def __str__(self) -> str:
        return " + ".join(map(str, self.terms))

    @property
    def summands(self) -> int:
        return sum(t.count for t in self.terms)


def _parse_term(text: str) -> Term:
    count = 1
    rep = _REP.search(text)
    if rep:
        count = int(rep["rep"])
        text = text[: rep.start()]
    m = _TERM.fullmatch(text)
    if not m:
        raise ConfigError(f"cannot parse term {text!r}")
    if m["dim"] is not None:
        return Term("A-A", True, int(m["dim"]) * count)
    base = m["base"].strip("()")
    if base == "A-A" and m["sq"] and not m["base"].startswith("("):
        raise ConfigError("write the squared difference set as (A-A)^2")
    return Term(base, bool(m["sq"]), count)


def parse_expression(text: "str | SumExpression") -> SumExpression:
    if isinstance(text, SumExpression):
        return text
    cleaned = re.sub(r"\s+", "", text).replace("−", "-")
    if not cleaned:
        raise ConfigError("empty expression")
    return SumExpression(tuple(_parse_term(part) for part in cleaned.split("+")))
