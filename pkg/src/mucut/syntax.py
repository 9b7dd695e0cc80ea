"""Text syntax for formulas and sequents.

Connectives: ``mu X. A``, ``nu X. A``, ``!A``, ``?A``, ``box A``, ``dia A``,
``neg A``, ``A * B``, ``A par B``, ``A & B``, ``A + B``, ``A -o B``,
``A /\\ B``, ``A \\/ B``, ``A -> B`` and the units ``1 bot top 0 T F``.
Lower-case identifiers are atoms, upper-case ones are variables unless they
name an abbreviation.  Binding strength, loosest first: binders, the
implications (right associative), ``par + \\/``, ``* & /\\``, prefix operators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .calculus import Sequent
from .errors import ParseError
from .formula import Formula, Var

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<num>[01])(?![0-9])|(?P<sym>\|-|-o|->|/\\|\\/|[()!?*&+.,]))")

_KEYWORDS = {"mu", "nu", "box", "dia", "neg", "par", "top", "bot", "T", "F"}
_UNITS = {"1": "one", "0": "zero", "top": "top", "bot": "bot", "T": "true", "F": "false"}
_PREFIX = {"!": "bang", "?": "quest", "box": "box", "dia": "dia", "neg": "neg"}
_LEVEL_IMPL = {"->": "impl", "-o": "limpl"}
_LEVEL_OR = {"\\/": "or", "par": "par", "+": "plus"}
_LEVEL_AND = {"/\\": "and", "*": "tensor", "&": "with"}


@dataclass
class _Tok:
    text: str
    kind: str
    col: int


def tokenize(text: str, line: int = 1, offset: int = 0) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    while i < len(text):
        if text[i:].strip() == "":
            break
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            j = len(text) - len(text[i:].lstrip())
            raise ParseError(f"unexpected character {text[j]!r}", line, offset + j + 1)
        kind = m.lastgroup
        tok = m.group(kind)
        toks.append(_Tok(tok, kind, offset + m.start(kind) + 1))
        i = m.end()
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], abbrevs: dict[str, Formula], line: int):
        self.toks = toks
        self.i = 0
        self.abbrevs = abbrevs
        self.line = line

    def peek(self) -> str | None:
        return self.toks[self.i].text if self.i < len(self.toks) else None

    def col(self) -> int:
        return self.toks[self.i].col if self.i < len(self.toks) else (self.toks[-1].col + 1 if self.toks else 1)

    def fail(self, msg: str):
        raise ParseError(msg, self.line, self.col())

    def take(self, want: str | None = None) -> str:
        t = self.peek()
        if t is None or (want is not None and t != want):
            self.fail(f"expected {want or 'a token'}, found {t or 'end of input'}")
        self.i += 1
        return t

    def formula(self, bound: frozenset[str]) -> Formula:
        if self.peek() in ("mu", "nu"):
            return self.binder(bound)
        left = self.level(bound, 1)
        if self.peek() in _LEVEL_IMPL:
            op = _LEVEL_IMPL[self.take()]
            return Formula(op, (left, self.formula(bound)))
        return left

    def binder(self, bound: frozenset[str]) -> Formula:
        op = self.take()
        t = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", t) or t in _KEYWORDS:
            self.i -= 1
            self.fail(f"expected a variable after {op}")
        self.take(".")
        return Formula(op, (self.formula(bound | {t}),), t)

    def level(self, bound: frozenset[str], n: int) -> Formula:
        table = _LEVEL_OR if n == 1 else _LEVEL_AND
        left = self.level(bound, 2) if n == 1 else self.unary(bound)
        while self.peek() in table:
            op = table[self.take()]
            right = self.level(bound, 2) if n == 1 else self.unary(bound)
            left = Formula(op, (left, right))
        return left

    def unary(self, bound: frozenset[str]) -> Formula:
        t = self.peek()
        if t in _PREFIX:
            self.take()
            return Formula(_PREFIX[t], (self.unary(bound),))
        if t in ("mu", "nu"):
            return self.binder(bound)
        if t == "(":
            self.take()
            f = self.formula(bound)
            self.take(")")
            return f
        if t in _UNITS:
            self.take()
            return Formula(_UNITS[t])
        if t is not None and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", t) and t not in _KEYWORDS:
            self.take()
            if t in bound:
                return Var(t)
            if t in self.abbrevs:
                return self.abbrevs[t]
            if t[0].isupper():
                return Var(t)
            return Formula("atom", (), t)
        self.fail(f"unexpected {t or 'end of input'}")


def parse_formula(text: str, abbrevs: dict[str, Formula] | None = None, line: int = 0, offset: int = 0) -> Formula:
    p = _Parser(tokenize(text, line, offset), abbrevs or {}, line)
    f = p.formula(frozenset())
    if p.peek() is not None:
        p.fail(f"trailing input {p.peek()!r}")
    return f


def parse_sequent(text: str, abbrevs: dict[str, Formula] | None = None, line: int = 0, offset: int = 0) -> Sequent:
    p = _Parser(tokenize(text, line, offset), abbrevs or {}, line)
    sides: list[list[Formula]] = [[], []]
    k = 0
    while p.peek() is not None:
        if p.peek() == "|-":
            if k == 1:
                p.fail("second turnstile")
            p.take()
            k = 1
            continue
        sides[k].append(p.formula(frozenset()))
        if p.peek() == ",":
            p.take()
        elif p.peek() not in (None, "|-"):
            p.fail(f"expected ',' or '|-', found {p.peek()!r}")
    if k == 0:
        raise ParseError("missing turnstile '|-'", line, offset + 1)
    return Sequent(tuple(sides[0]), tuple(sides[1]))
