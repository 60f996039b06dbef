"""Temporal formulas over evolution paths, and their text form.

Grammar:

    prop  := "after" EVENT prop | "before" EVENT trace | trace
    trace := ("always" | "eventually") property-name-or-inline-property
    EVENT := OPNAME ("normal" | "exceptional" | "terminates")

The trailing property is anything parse_cp accepts, including names from a
definitions file. ``#`` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import ParseError
from .model import Configuration, config_equal
from .properties import CpFormula, parse_cp


class Termination(str, Enum):
    NORMAL = "normal"
    EXCEPTIONAL = "exceptional"
    TERMINATES = "terminates"


@dataclass(frozen=True)
class Event:
    op: str
    termination: Termination

    def __str__(self):
        return f"{self.op} {self.termination.value}"


@dataclass(frozen=True)
class Always:
    prop: CpFormula


@dataclass(frozen=True)
class Eventually:
    prop: CpFormula


TraceFormula = Always | Eventually


@dataclass(frozen=True)
class After:
    event: Event
    body: "FtplFormula"


@dataclass(frozen=True)
class Before:
    event: Event
    trace: TraceFormula


FtplFormula = After | Before | Always | Eventually


def term_check(event: Event, new: Configuration, old: Configuration) -> bool:
    """Did the fired operation terminate the way the event requires?

    ``normal`` asks for an actual state change, ``exceptional`` for the
    robust identity outcome, ``terminates`` for either.
    """
    if event.termination == Termination.NORMAL:
        return not config_equal(new, old)
    if event.termination == Termination.EXCEPTIONAL:
        return config_equal(new, old)
    return True


def embedded_properties(formula: FtplFormula) -> list[CpFormula]:
    if isinstance(formula, (Always, Eventually)):
        return [formula.prop]
    if isinstance(formula, After):
        return embedded_properties(formula.body)
    if isinstance(formula, Before):
        return embedded_properties(formula.trace)
    raise TypeError(f"unknown temporal node {formula!r}")


def mentions_eventually(formula: FtplFormula) -> bool:
    if isinstance(formula, Eventually):
        return True
    if isinstance(formula, Always):
        return False
    if isinstance(formula, After):
        return mentions_eventually(formula.body)
    return mentions_eventually(formula.trace)


_FTPL_WORD_RE = re.compile(r"\s+|#[^\n]*|\S+")


def parse_ftpl(text: str, definitions: dict[str, CpFormula] | None,
               op_table: dict, *, source: str | None = None) -> FtplFormula:
    """Parse one temporal formula; operation names must be in the table."""
    words = []
    for m in _FTPL_WORD_RE.finditer(text):
        w = m.group()
        if not w.isspace() and not w.startswith("#"):
            words.append((w, m.start()))
    if not words:
        raise ParseError("empty temporal formula", source=source)

    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(words):
            raise ParseError(f"expected {what}, found end of formula", source=source)
        w = words[pos][0]
        pos += 1
        return w

    def event() -> Event:
        op = take("an operation name")
        if op not in op_table:
            raise ParseError(f"unknown operation {op!r}", source=source)
        term = take("normal, exceptional or terminates")
        try:
            termination = Termination(term)
        except ValueError:
            raise ParseError(f"expected normal, exceptional or terminates, found {term!r}",
                             source=source) from None
        return Event(op, termination)

    def prop() -> FtplFormula:
        head = take("after, before, always or eventually")
        if head == "after":
            ev = event()
            return After(ev, prop())
        if head == "before":
            ev = event()
            tr = prop()
            if not isinstance(tr, (Always, Eventually)):
                raise ParseError("'before' takes an always/eventually trace property",
                                 source=source)
            return Before(ev, tr)
        if head in ("always", "eventually"):
            start = words[pos][1] if pos < len(words) else len(text)
            rest = text[start:]
            # strip trailing comments handled by parse_cp's tokenizer
            cp = parse_cp(rest, definitions, source=source)
            consume_all()
            return Always(cp) if head == "always" else Eventually(cp)
        raise ParseError(f"expected after, before, always or eventually, found {head!r}",
                         source=source)

    def consume_all():
        nonlocal pos
        pos = len(words)

    formula = prop()
    if pos != len(words):
        raise ParseError(f"unexpected {words[pos][0]!r} after formula", source=source)
    return formula
