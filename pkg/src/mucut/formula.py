"""Formulas of the classical, linear and modal fixed-point calculi.

A single immutable :class:`Formula` type covers every grammar used by the
library.  Pre-formulas (open terms, terms violating positivity) share the
type; :func:`is_formula` decides formula-hood for a given system.

Equality is alpha-equivalence: two formulas are equal when their
de Bruijn keys coincide.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

from .errors import NotAFixpoint

NULLARY = frozenset({"one", "bot", "top", "zero", "true", "false"})
NAMED = frozenset({"atom", "var"})
UNARY = frozenset({"neg", "bang", "quest", "box", "dia"})
BINDERS = frozenset({"mu", "nu"})
BINARY = frozenset({"impl", "limpl", "and", "or", "tensor", "par", "with", "plus"})
OPS = NULLARY | NAMED | UNARY | BINDERS | BINARY


@dataclass(frozen=True, eq=False)
class Formula:
    op: str
    args: tuple["Formula", ...] = ()
    name: str | None = None

    def __post_init__(self) -> None:
        if self.op not in OPS:
            raise ValueError(f"unknown connective {self.op!r}")

    # -- identity -------------------------------------------------------
    @cached_property
    def key(self) -> tuple:
        return _key(self, ())

    @cached_property
    def _hash(self) -> int:
        return hash(self.key)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Formula):
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    # -- structure ------------------------------------------------------
    @property
    def body(self) -> "Formula":
        return self.args[0]

    @property
    def left(self) -> "Formula":
        return self.args[0]

    @property
    def right(self) -> "Formula":
        return self.args[1]

    def is_fixpoint(self) -> bool:
        return self.op in BINDERS

    @cached_property
    def free_vars(self) -> frozenset[str]:
        if self.op == "var":
            return frozenset({self.name})
        if self.op in BINDERS:
            return self.args[0].free_vars - {self.name}
        out: frozenset[str] = frozenset()
        for a in self.args:
            out |= a.free_vars
        return out

    def is_closed(self) -> bool:
        return not self.free_vars

    @cached_property
    def size(self) -> int:
        return 1 + sum(a.size for a in self.args)

    @cached_property
    def subterms(self) -> frozenset["Formula"]:
        """Subterms that do not mention a variable bound above them."""
        out: set[Formula] = set()
        _collect_subterms(self, frozenset(), out)
        return frozenset(out)

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"Formula({to_text(self)!r})"


def _key(f: Formula, env: tuple[str, ...]) -> tuple:
    op = f.op
    if op == "var":
        if f.name in env:
            return ("#", env.index(f.name))
        return ("var", f.name)
    if op == "atom":
        return ("atom", f.name)
    if op in BINDERS:
        return (op, _key(f.args[0], (f.name,) + env))
    if not f.args:
        return (op,)
    return (op,) + tuple(_key(a, env) for a in f.args)


def _collect_subterms(f: Formula, bound: frozenset[str], out: set[Formula]) -> None:
    if not (f.free_vars & bound):
        out.add(f)
    if f.op in BINDERS:
        _collect_subterms(f.args[0], bound | {f.name}, out)
    else:
        for a in f.args:
            _collect_subterms(a, bound, out)


# -- constructors ---------------------------------------------------------

def Atom(name: str) -> Formula:
    return Formula("atom", (), name)


def Var(name: str) -> Formula:
    return Formula("var", (), name)


def Mu(x: str, body: Formula) -> Formula:
    return Formula("mu", (body,), x)


def Nu(x: str, body: Formula) -> Formula:
    return Formula("nu", (body,), x)


def Neg(a: Formula) -> Formula:
    return Formula("neg", (a,))


def Impl(a: Formula, b: Formula) -> Formula:
    return Formula("impl", (a, b))


def LinImpl(a: Formula, b: Formula) -> Formula:
    return Formula("limpl", (a, b))


def And(a: Formula, b: Formula) -> Formula:
    return Formula("and", (a, b))


def Or(a: Formula, b: Formula) -> Formula:
    return Formula("or", (a, b))


def Tensor(a: Formula, b: Formula) -> Formula:
    return Formula("tensor", (a, b))


def Par(a: Formula, b: Formula) -> Formula:
    return Formula("par", (a, b))


def With(a: Formula, b: Formula) -> Formula:
    return Formula("with", (a, b))


def Plus(a: Formula, b: Formula) -> Formula:
    return Formula("plus", (a, b))


def Bang(a: Formula) -> Formula:
    return Formula("bang", (a,))


def Quest(a: Formula) -> Formula:
    return Formula("quest", (a,))


def Box(a: Formula) -> Formula:
    return Formula("box", (a,))


def Diamond(a: Formula) -> Formula:
    return Formula("dia", (a,))


One = Formula("one")
Bot = Formula("bot")
Top = Formula("top")
Zero = Formula("zero")
ClTrue = Formula("true")
ClFalse = Formula("false")


# -- positivity -------------------------------------------------------------

class Polarity(enum.Enum):
    PositiveOnly = "positive"
    NegativeOccurs = "negative"
    Absent = "absent"


def _signs(f: Formula, x: str, sign: int, out: set[int]) -> None:
    op = f.op
    if op == "var":
        if f.name == x:
            out.add(sign)
    elif op in BINDERS:
        if f.name != x:
            _signs(f.args[0], x, sign, out)
    elif op == "neg":
        _signs(f.args[0], x, -sign, out)
    elif op in ("impl", "limpl"):
        _signs(f.args[0], x, -sign, out)
        _signs(f.args[1], x, sign, out)
    else:
        for a in f.args:
            _signs(a, x, sign, out)


def occurrence_signs(f: Formula, x: str) -> frozenset[int]:
    """Signs (+1/-1) of the free occurrences of ``x`` in ``f``."""
    out: set[int] = set()
    _signs(f, x, 1, out)
    return frozenset(out)


def polarity(f: Formula, x: str) -> Polarity:
    signs = occurrence_signs(f, x)
    if -1 in signs:
        return Polarity.NegativeOccurs
    if signs:
        return Polarity.PositiveOnly
    return Polarity.Absent


# -- systems ----------------------------------------------------------------

_LK = frozenset({"atom", "neg", "impl", "and", "or", "true", "false"})
_MALL = frozenset({"atom", "neg", "limpl", "tensor", "par", "with", "plus",
                   "one", "bot", "top", "zero"})
_MODAL = frozenset({"box", "dia"})
_FIX = frozenset({"mu", "nu", "var"})
_EXP = frozenset({"bang", "quest"})


class SystemId(enum.Enum):
    MuLKBox = "MuLKBox"
    MuLK = "MuLK"
    LKBox = "LKBox"
    LK = "LK"
    MuMALL = "MuMALL"
    MALL = "MALL"
    MuLL = "MuLL"
    LL = "LL"
    MuLLBox = "MuLLBox"

    @property
    def ops(self) -> frozenset[str]:
        return _SYSTEM_OPS[self]

    @property
    def classical(self) -> bool:
        return "impl" in self.ops

    def includes(self, other: "SystemId") -> bool:
        return other.ops <= self.ops and other.classical == self.classical


_SYSTEM_OPS = {
    SystemId.MuLKBox: _LK | _MODAL | _FIX,
    SystemId.MuLK: _LK | _FIX,
    SystemId.LKBox: _LK | _MODAL,
    SystemId.LK: _LK,
    SystemId.MuMALL: _MALL | _FIX,
    SystemId.MALL: _MALL,
    SystemId.MuLL: _MALL | _EXP | _FIX,
    SystemId.LL: _MALL | _EXP,
    SystemId.MuLLBox: _MALL | _EXP | _FIX | _MODAL,
}


def connectives(f: Formula) -> frozenset[str]:
    out = {f.op}
    for a in f.args:
        out |= connectives(a)
    return frozenset(out)


def positive_binders(f: Formula) -> bool:
    if f.op in BINDERS and polarity(f.args[0], f.name) is Polarity.NegativeOccurs:
        return False
    return all(positive_binders(a) for a in f.args)


def is_formula(f: Formula, sys: SystemId) -> bool:
    return f.is_closed() and positive_binders(f) and connectives(f) <= sys.ops


# -- substitution -------------------------------------------------------------

def _fresh(base: str, avoid: set[str]) -> str:
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def substitute(f: Formula, x: str, g: Formula) -> Formula:
    """Capture-avoiding substitution ``f[x := g]``."""
    if x not in f.free_vars:
        return f
    op = f.op
    if op == "var":
        return g
    if op in BINDERS:
        y, body = f.name, f.args[0]
        if y in g.free_vars:
            z = _fresh(y, set(g.free_vars) | set(body.free_vars) | {x})
            body = substitute(body, y, Var(z))
            y = z
        return Formula(op, (substitute(body, x, g),), y)
    return Formula(op, tuple(substitute(a, x, g) for a in f.args), f.name)


def unfold_fixpoint(f: Formula) -> Formula:
    if f.op not in BINDERS:
        raise NotAFixpoint(f"not a fixed point: {f}")
    return substitute(f.args[0], f.name, f)


# -- closure and ordering -------------------------------------------------------

def closure(f: Formula) -> frozenset[Formula]:
    """Fischer-Ladner closure: subformulas, with binders replaced by unfoldings."""
    seen: set[Formula] = set()
    todo = [f]
    while todo:
        g = todo.pop()
        if g in seen:
            continue
        seen.add(g)
        if g.op in BINDERS:
            todo.append(unfold_fixpoint(g))
        else:
            todo.extend(g.args)
    return frozenset(seen)


def closure_of(formulas: Iterable[Formula]) -> frozenset[Formula]:
    out: set[Formula] = set()
    for f in formulas:
        if f not in out:
            out |= closure(f)
    return frozenset(out)


def formula_le(a: Formula, b: Formula) -> bool:
    """Subformula ordering used for minimal recurring formulas.

    ``a <= b`` iff ``a`` is a syntactic subterm of ``b``; in particular a
    fixed point lies below its unfolding.
    """
    return a == b or a in b.subterms


def minimum(formulas: Iterable[Formula]) -> Formula | None:
    """The least element for :func:`formula_le`, or ``None`` if there is none."""
    fs = list(dict.fromkeys(formulas))
    for m in fs:
        if all(formula_le(m, g) for g in fs):
            return m
    return None


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for a in f.args:
        yield from iter_subformulas(a)


# -- printing -----------------------------------------------------------------

_UNIT_TEXT = {"one": "1", "bot": "bot", "top": "top", "zero": "0", "true": "T", "false": "F"}
_PREFIX_TEXT = {"neg": "neg ", "bang": "!", "quest": "?", "box": "box ", "dia": "dia "}
_INFIX_TEXT = {"impl": "->", "limpl": "-o", "and": "/\\", "or": "\\/",
               "tensor": "*", "par": "par", "with": "&", "plus": "+"}


def to_text(f: Formula, abbrevs: dict[Formula, str] | None = None) -> str:
    """ASCII rendering accepted by :func:`mucut.syntax.parse_formula`."""
    if abbrevs and f in abbrevs:
        return abbrevs[f]
    op = f.op
    if op in NAMED:
        return f.name
    if op in NULLARY:
        return _UNIT_TEXT[op]
    if op in BINDERS:
        return f"{op} {f.name}. {to_text(f.args[0], abbrevs)}"
    if op in UNARY:
        return _PREFIX_TEXT[op] + _operand(f.args[0], abbrevs)
    return f"{_operand(f.args[0], abbrevs)} {_INFIX_TEXT[op]} {_operand(f.args[1], abbrevs)}"


def _operand(f: Formula, abbrevs: dict[Formula, str] | None) -> str:
    text = to_text(f, abbrevs)
    if (abbrevs and f in abbrevs) or not (f.op in BINARY or f.op in BINDERS):
        return text
    return f"({text})"
