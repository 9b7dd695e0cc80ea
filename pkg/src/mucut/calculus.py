"""Sequents, the rule catalogue and the ancestor relation.

Positions are addresses ``(side, index)`` with side ``"L"`` (antecedent)
or ``"R"`` (succedent).  Rule instances are computed bottom-up: given a
conclusion and the parameters of the rule, :func:`instantiate` produces
the premises together with the ancestor relation linking every
conclusion position to the premise positions it descends to.

Placement conventions, shared by every rule:

* a principal formula decomposed on its own side is replaced in place by
  its active formula(s);
* an active formula that changes side, or a fresh cut formula, goes to the
  end of the antecedent or to the start of the succedent;
* context-splitting rules receive an explicit ``split``: one 0/1 entry per
  non-principal position, antecedent positions first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import chain
from typing import Any, Iterable, Mapping, Sequence

from .errors import BadPermutation, BadSplit, ShapeMismatch, UnknownPosition
from .formula import Formula, SystemId, to_text, unfold_fixpoint

Pos = tuple[str, int]
PremisePos = tuple[int, Pos]


@dataclass(frozen=True)
class Sequent:
    ante: tuple[Formula, ...] = ()
    succ: tuple[Formula, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ante", tuple(self.ante))
        object.__setattr__(self, "succ", tuple(self.succ))

    def side(self, s: str) -> tuple[Formula, ...]:
        return self.ante if s == "L" else self.succ

    def at(self, pos: Pos) -> Formula:
        s, i = pos
        lst = self.side(s)
        if s not in ("L", "R") or not 0 <= i < len(lst):
            raise UnknownPosition(f"{s}{i} not in {self}")
        return lst[i]

    def has(self, pos: Pos) -> bool:
        s, i = pos
        return s in ("L", "R") and 0 <= i < len(self.side(s))

    def positions(self) -> list[Pos]:
        return [("L", i) for i in range(len(self.ante))] + [("R", i) for i in range(len(self.succ))]

    def items(self) -> list[tuple[Pos, Formula]]:
        return [(p, self.at(p)) for p in self.positions()]

    def formulas(self) -> tuple[Formula, ...]:
        return self.ante + self.succ

    def __len__(self) -> int:
        return len(self.ante) + len(self.succ)

    def map(self, fn) -> "Sequent":
        return Sequent(tuple(fn(f) for f in self.ante), tuple(fn(f) for f in self.succ))

    def to_text(self, abbrevs: dict[Formula, str] | None = None) -> str:
        a = ", ".join(to_text(f, abbrevs) for f in self.ante)
        s = ", ".join(to_text(f, abbrevs) for f in self.succ)
        return f"{a} |- {s}".strip()

    def __str__(self) -> str:
        return self.to_text()


def pos_text(p: Pos) -> str:
    return f"{p[0]}{p[1]}"


@dataclass(frozen=True)
class Params:
    principal: Pos | None = None
    split: tuple[int, ...] | None = None
    formula: Formula | None = None
    perm: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    index: int | None = None
    mcut: Any = None


@dataclass(frozen=True, eq=False)
class RuleApp:
    rule: str
    conclusion: Sequent
    premises: tuple[Sequent, ...]
    ancestors: Mapping[Pos, tuple[PremisePos, ...]]
    principal: tuple[Pos, ...]
    params: Params = field(default_factory=Params)
    active: tuple[tuple[PremisePos, ...], ...] = ()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RuleApp):
            return NotImplemented
        return (self.rule, self.conclusion, self.params) == (other.rule, other.conclusion, other.params)

    def __hash__(self) -> int:
        return hash((self.rule, self.conclusion))

    @property
    def arity(self) -> int:
        return len(self.premises)

    def descendants(self) -> dict[PremisePos, Pos]:
        """Inverse of the ancestor relation (premise position -> conclusion position)."""
        out: dict[PremisePos, Pos] = {}
        for c, targets in self.ancestors.items():
            for t in targets:
                out[t] = c
        return out

    def __repr__(self) -> str:
        return f"RuleApp({self.rule}, {self.conclusion})"


@dataclass(frozen=True)
class RuleSchema:
    name: str
    systems: frozenset[SystemId]
    arity: int | None


_ALL = frozenset(SystemId)
_CLASSICAL = frozenset({SystemId.MuLKBox, SystemId.MuLK, SystemId.LKBox, SystemId.LK})
_CL_MODAL = frozenset({SystemId.MuLKBox, SystemId.LKBox})
_FIXED = frozenset({SystemId.MuLKBox, SystemId.MuLK, SystemId.MuMALL, SystemId.MuLL, SystemId.MuLLBox})
_LINEAR = frozenset({SystemId.MuMALL, SystemId.MALL, SystemId.MuLL, SystemId.LL, SystemId.MuLLBox})
_EXPO = frozenset({SystemId.MuLL, SystemId.LL, SystemId.MuLLBox})
_LL_MODAL = frozenset({SystemId.MuLLBox})

_TABLE: list[tuple[str, frozenset[SystemId], int | None]] = [
    ("ax", _ALL, 0), ("cut", _ALL, 2), ("ex", _ALL, 1), ("ex_l", _ALL, 1), ("ex_r", _ALL, 1),
    ("mcut", _ALL, None), ("neg_l", _ALL, 1), ("neg_r", _ALL, 1),
    ("or_r1", _CLASSICAL, 1), ("or_r2", _CLASSICAL, 1), ("or_l", _CLASSICAL, 2),
    ("and_l1", _CLASSICAL, 1), ("and_l2", _CLASSICAL, 1), ("and_r", _CLASSICAL, 2),
    ("true_r", _CLASSICAL, 0), ("false_l", _CLASSICAL, 0),
    ("impl_r", _CLASSICAL, 1), ("impl_l", _CLASSICAL, 2),
    ("w_l", _CLASSICAL, 1), ("w_r", _CLASSICAL, 1), ("c_l", _CLASSICAL, 1), ("c_r", _CLASSICAL, 1),
    ("mu_l", _FIXED, 1), ("mu_r", _FIXED, 1), ("nu_l", _FIXED, 1), ("nu_r", _FIXED, 1),
    ("tensor_r", _LINEAR, 2), ("tensor_l", _LINEAR, 1), ("par_r", _LINEAR, 1), ("par_l", _LINEAR, 2),
    ("limpl_r", _LINEAR, 1), ("limpl_l", _LINEAR, 2),
    ("plus_r1", _LINEAR, 1), ("plus_r2", _LINEAR, 1), ("plus_l", _LINEAR, 2),
    ("with_l1", _LINEAR, 1), ("with_l2", _LINEAR, 1), ("with_r", _LINEAR, 2),
    ("one_r", _LINEAR, 0), ("one_l", _LINEAR, 1), ("bot_l", _LINEAR, 0), ("bot_r", _LINEAR, 1),
    ("top_r", _LINEAR, 0), ("zero_l", _LINEAR, 0),
    ("wn_w", _EXPO, 1), ("wn_c", _EXPO, 1), ("wn_d", _EXPO, 1), ("wn_p", _EXPO, 1),
    ("oc_w", _EXPO, 1), ("oc_c", _EXPO, 1), ("oc_d", _EXPO, 1), ("oc_p", _EXPO, 1),
    ("box_p", _CL_MODAL | _LL_MODAL, 1), ("dia_p", _CL_MODAL | _LL_MODAL, 1),
    ("dia_w", _LL_MODAL, 1), ("dia_c", _LL_MODAL, 1), ("box_w", _LL_MODAL, 1), ("box_c", _LL_MODAL, 1),
    ("oc_p_dia", _LL_MODAL, 1), ("wn_p_box", _LL_MODAL, 1),
]

RULES: dict[str, RuleSchema] = {}
for _name, _sys, _ar in _TABLE:
    RULES[_name] = RuleSchema(_name, _sys, _ar)

# rules whose principal formula is not counted as principal for threads
STRUCTURAL = frozenset({"ex", "ex_l", "ex_r", "cut", "mcut", "c_l", "c_r", "wn_c", "oc_c",
                        "dia_c", "box_c", "w_l", "w_r", "wn_w", "oc_w", "dia_w", "box_w"})
WEAKENINGS = frozenset({"w_l", "w_r", "wn_w", "oc_w", "dia_w", "box_w"})
CONTRACTIONS = frozenset({"c_l", "c_r", "wn_c", "oc_c", "dia_c", "box_c"})
DERELICTIONS = frozenset({"wn_d", "oc_d"})
PROMOTIONS = frozenset({"oc_p", "wn_p", "oc_p_dia", "wn_p_box"})
MODAL_PROMOTIONS = frozenset({"box_p", "dia_p"})
EXCHANGES = frozenset({"ex", "ex_l", "ex_r"})


def rule_in_system(rule: str, sys: SystemId) -> bool:
    if rule == "oc_p" and sys is SystemId.MuLLBox:
        return True
    return sys in RULES[rule].systems


# -- helpers --------------------------------------------------------------------

Slot = tuple[Pos | None, Formula]


class _Builder:
    """Accumulates premise slots; a slot remembers its conclusion position."""

    def __init__(self, concl: Sequent):
        self.concl = concl

    def ctx(self, side: str, exclude: Iterable[Pos] = ()) -> list[Slot]:
        ex = set(exclude)
        return [((side, i), f) for i, f in enumerate(self.concl.side(side)) if (side, i) not in ex]


def _check_split(concl: Sequent, principal: Pos | None, split: Sequence[int] | None) -> dict[Pos, int]:
    others = [p for p in concl.positions() if p != principal]
    if split is None or len(split) != len(others) or any(v not in (0, 1) for v in split):
        raise BadSplit(f"split {split!r} does not fit {len(others)} side formulas")
    return dict(zip(others, split))


def _split_side(b: _Builder, side: str, assign: dict[Pos, int], part: int,
                principal: Pos | None, actives: list[Slot] | None = None) -> list[Slot]:
    """Context slots of ``side`` going to ``part``; actives inserted at the principal's relative index."""
    out: list[Slot] = []
    for i, f in enumerate(b.concl.side(side)):
        p = (side, i)
        if p == principal:
            out.extend(actives or [])
        elif assign[p] == part:
            out.append((p, f))
    return out


def _in_place(b: _Builder, p: Pos, actives: list[Formula]) -> tuple[list[Slot], list[Slot]]:
    ante = b.ctx("L")
    succ = b.ctx("R")
    lst = ante if p[0] == "L" else succ
    lst[p[1]:p[1] + 1] = [(p, f) for f in actives]
    return ante, succ


def _finish(rule: str, concl: Sequent, premises: list[tuple[list[Slot], list[Slot]]],
            principal: tuple[Pos, ...], params: Params) -> RuleApp:
    anc: dict[Pos, list[PremisePos]] = {p: [] for p in concl.positions()}
    seqs = []
    active = []
    for k, (ante, succ) in enumerate(premises):
        seqs.append(Sequent(tuple(f for _, f in ante), tuple(f for _, f in succ)))
        act = []
        for side, slots in (("L", ante), ("R", succ)):
            for i, (src, _) in enumerate(slots):
                if src is not None:
                    anc[src].append((k, (side, i)))
                    if src in principal or src == params.principal:
                        act.append((k, (side, i)))
        active.append(tuple(act))
    return RuleApp(rule, concl, tuple(seqs), {p: tuple(v) for p, v in anc.items()},
                   principal, params, tuple(active))


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ShapeMismatch(msg)


def _principal(concl: Sequent, p: Pos | None, side: str, ops: Iterable[str], rule: str) -> Formula:
    _need(p is not None and p[0] == side and concl.has(p),
          f"{rule}: needs a principal position on side {side}")
    f = concl.at(p)
    _need(f.op in set(ops), f"{rule}: principal formula {f} has the wrong shape")
    return f


def _permutation(perm: Sequence[int], n: int, what: str) -> tuple[int, ...]:
    perm = tuple(perm)
    if sorted(perm) != list(range(n)):
        raise BadPermutation(f"{what}: {perm!r} is not a permutation of {n} elements")
    return perm


# -- the catalogue ----------------------------------------------------------------

_UNIT_RULES = {"true_r": ("R", "true"), "false_l": ("L", "false"),
               "top_r": ("R", "top"), "zero_l": ("L", "zero")}
_IN_PLACE_UNARY = {
    # rule: (side, connective, which args survive)
    "or_r1": ("R", "or", (0,)), "or_r2": ("R", "or", (1,)),
    "and_l1": ("L", "and", (0,)), "and_l2": ("L", "and", (1,)),
    "tensor_l": ("L", "tensor", (0, 1)), "par_r": ("R", "par", (0, 1)),
    "plus_r1": ("R", "plus", (0,)), "plus_r2": ("R", "plus", (1,)),
    "with_l1": ("L", "with", (0,)), "with_l2": ("L", "with", (1,)),
    "wn_d": ("R", "quest", (0,)), "oc_d": ("L", "bang", (0,)),
}
_SHARING = {"or_l": ("L", "or"), "and_r": ("R", "and"), "plus_l": ("L", "plus"), "with_r": ("R", "with")}
_SPLITTING = {"tensor_r": ("R", "tensor"), "par_l": ("L", "par")}
_FIX_RULES = {"mu_l": ("L", "mu"), "mu_r": ("R", "mu"), "nu_l": ("L", "nu"), "nu_r": ("R", "nu")}
_WEAK = {"w_l": ("L", None), "w_r": ("R", None), "wn_w": ("R", "quest"), "oc_w": ("L", "bang"),
         "dia_w": ("R", "dia"), "box_w": ("L", "box"), "one_l": ("L", "one"), "bot_r": ("R", "bot")}
_CONTR = {"c_l": ("L", None), "c_r": ("R", None), "wn_c": ("R", "quest"), "oc_c": ("L", "bang"),
          "dia_c": ("R", "dia"), "box_c": ("L", "box")}
_PROMO = {
    # rule: (side, connective, antecedent context ops, succedent context ops, unwrap context)
    "oc_p": ("R", "bang", {"bang"}, {"quest"}, False),
    "wn_p": ("L", "quest", {"bang"}, {"quest"}, False),
    "oc_p_dia": ("R", "bang", {"bang", "box"}, {"quest", "dia"}, False),
    "wn_p_box": ("L", "quest", {"bang", "box"}, {"quest", "dia"}, False),
    "box_p": ("R", "box", {"box"}, {"dia"}, True),
    "dia_p": ("L", "dia", {"box"}, {"dia"}, True),
}


def instantiate(rule: str, conclusion: Sequent, principal: Pos | None = None,
                split: Sequence[int] | None = None, formula: Formula | None = None,
                perm: tuple[Sequence[int], Sequence[int]] | None = None,
                index: int | None = None) -> RuleApp:
    """Instantiate ``rule`` on ``conclusion`` and compute its premises bottom-up."""
    if rule not in RULES or rule == "mcut":
        raise ShapeMismatch(f"unknown rule {rule!r}")
    c = conclusion
    b = _Builder(c)
    split_t = tuple(split) if split is not None else None
    params = Params(principal=principal, split=split_t, formula=formula,
                    perm=(tuple(perm[0]), tuple(perm[1])) if perm is not None else None, index=index)

    if rule == "ax":
        _need(len(c.ante) == 1 and len(c.succ) == 1 and c.ante[0] == c.succ[0],
              "ax: conclusion must be F |- F")
        return _finish(rule, c, [], (), Params())
    if rule in ("one_r", "bot_l"):
        want = Sequent((), (Formula("one"),)) if rule == "one_r" else Sequent((Formula("bot"),), ())
        _need(c == want, f"{rule}: conclusion must be {want}")
        return _finish(rule, c, [], (), Params())
    if rule in _UNIT_RULES:
        side, op = _UNIT_RULES[rule]
        _principal(c, principal, side, {op}, rule)
        return _finish(rule, c, [], (principal,), params)
    if rule == "cut":
        _need(formula is not None, "cut: needs a cut formula")
        assign = _check_split(c, None, split_t)
        p0 = (_split_side(b, "L", assign, 0, None), [(None, formula)] + _split_side(b, "R", assign, 0, None))
        p1 = (_split_side(b, "L", assign, 1, None) + [(None, formula)], _split_side(b, "R", assign, 1, None))
        return _finish(rule, c, [p0, p1], (), params)
    if rule == "ex":
        _need(perm is not None, "ex: needs permutations")
        pl = _permutation(perm[0], len(c.ante), "ex antecedent")
        pr = _permutation(perm[1], len(c.succ), "ex succedent")
        ante = [(("L", j), c.ante[j]) for j in pl]
        succ = [(("R", j), c.succ[j]) for j in pr]
        return _finish(rule, c, [(ante, succ)], (), Params(perm=(pl, pr)))
    if rule in ("ex_l", "ex_r"):
        side = "L" if rule == "ex_l" else "R"
        n = len(c.side(side))
        if index is None or not 0 <= index < n - 1:
            raise BadPermutation(f"{rule}: bad index {index!r}")
        ante, succ = b.ctx("L"), b.ctx("R")
        lst = ante if side == "L" else succ
        lst[index], lst[index + 1] = lst[index + 1], lst[index]
        return _finish(rule, c, [(ante, succ)], (), Params(index=index))
    if rule in _IN_PLACE_UNARY:
        side, op, keep = _IN_PLACE_UNARY[rule]
        f = _principal(c, principal, side, {op}, rule)
        return _finish(rule, c, [_in_place(b, principal, [f.args[k] for k in keep])], (principal,), params)
    if rule in _FIX_RULES:
        side, op = _FIX_RULES[rule]
        f = _principal(c, principal, side, {op}, rule)
        return _finish(rule, c, [_in_place(b, principal, [unfold_fixpoint(f)])], (principal,), params)
    if rule in _WEAK:
        side, op = _WEAK[rule]
        f = _principal(c, principal, side, {op} if op else {f2.op for f2 in c.side(side)}, rule)
        prem = _in_place(b, principal, [])
        struct = () if rule in STRUCTURAL else (principal,)
        return _finish(rule, c, [prem], struct, params)
    if rule in _CONTR:
        side, op = _CONTR[rule]
        f = _principal(c, principal, side, {op} if op else {f2.op for f2 in c.side(side)}, rule)
        return _finish(rule, c, [_in_place(b, principal, [f, f])], (), params)
    if rule in _SHARING:
        side, op = _SHARING[rule]
        f = _principal(c, principal, side, {op}, rule)
        return _finish(rule, c, [_in_place(b, principal, [f.args[0]]), _in_place(b, principal, [f.args[1]])],
                       (principal,), params)
    if rule in _SPLITTING:
        side, op = _SPLITTING[rule]
        f = _principal(c, principal, side, {op}, rule)
        assign = _check_split(c, principal, split_t)
        prems = []
        for k in (0, 1):
            act = [(principal, f.args[k])]
            if side == "L":
                prems.append((_split_side(b, "L", assign, k, principal, act), _split_side(b, "R", assign, k, None)))
            else:
                prems.append((_split_side(b, "L", assign, k, None), _split_side(b, "R", assign, k, principal, act)))
        return _finish(rule, c, prems, (principal,), params)
    if rule in ("impl_r", "limpl_r"):
        op = "impl" if rule == "impl_r" else "limpl"
        f = _principal(c, principal, "R", {op}, rule)
        ante = b.ctx("L") + [(principal, f.args[0])]
        succ = b.ctx("R")
        succ[principal[1]] = (principal, f.args[1])
        return _finish(rule, c, [(ante, succ)], (principal,), params)
    if rule in ("impl_l", "limpl_l"):
        op = "impl" if rule == "impl_l" else "limpl"
        f = _principal(c, principal, "L", {op}, rule)
        assign = _check_split(c, principal, split_t)
        p0 = (_split_side(b, "L", assign, 0, principal, [(principal, f.args[1])]), _split_side(b, "R", assign, 0, None))
        p1 = (_split_side(b, "L", assign, 1, principal), [(principal, f.args[0])] + _split_side(b, "R", assign, 1, None))
        return _finish(rule, c, [p0, p1], (principal,), params)
    if rule == "neg_r":
        f = _principal(c, principal, "R", {"neg"}, rule)
        return _finish(rule, c, [(b.ctx("L") + [(principal, f.args[0])], b.ctx("R", [principal]))],
                       (principal,), params)
    if rule == "neg_l":
        f = _principal(c, principal, "L", {"neg"}, rule)
        return _finish(rule, c, [(b.ctx("L", [principal]), [(principal, f.args[0])] + b.ctx("R"))],
                       (principal,), params)
    if rule in _PROMO:
        side, op, ante_ok, succ_ok, unwrap = _PROMO[rule]
        f = _principal(c, principal, side, {op}, rule)
        for p, g in c.items():
            if p == principal:
                continue
            ok = ante_ok if p[0] == "L" else succ_ok
            _need(g.op in ok, f"{rule}: side formula {g} not allowed in the promotion context")
        ante, succ = b.ctx("L"), b.ctx("R")
        if unwrap:
            ante = [(p, g.args[0]) for p, g in ante]
            succ = [(p, g.args[0]) for p, g in succ]
        else:
            lst = ante if side == "L" else succ
            lst[principal[1]] = (principal, f.args[0])
        return _finish(rule, c, [(ante, succ)], (principal,), params)
    raise ShapeMismatch(f"no instantiation procedure for {rule}")


def ancestor_trace(r: RuleApp, p: Pos) -> frozenset[PremisePos]:
    if p not in r.ancestors:
        raise UnknownPosition(f"{pos_text(p)} is not a position of {r.conclusion}")
    return frozenset(r.ancestors[p])


def derived_exchange(conclusion: Sequent, perms: tuple[Sequence[int], Sequence[int]]) -> RuleApp:
    return instantiate("ex", conclusion, perm=perms)


def adjacent_exchanges(r: RuleApp) -> list[RuleApp]:
    """Decompose an ``ex`` instance into adjacent swaps, listed bottom-up."""
    if r.rule in ("ex_l", "ex_r"):
        return [r]
    if r.rule != "ex":
        raise ShapeMismatch(f"{r.rule} is not an exchange")
    steps: list[RuleApp] = []
    seq = r.conclusion
    for side, rule in (("L", "ex_l"), ("R", "ex_r")):
        target = list(r.params.perm[0] if side == "L" else r.params.perm[1])
        swaps = []
        # bubble sort target back to the identity, then replay the swaps in reverse
        work = target[:]
        for i in range(len(work)):
            for j in range(len(work) - 1 - i):
                if work[j] > work[j + 1]:
                    work[j], work[j + 1] = work[j + 1], work[j]
                    swaps.append(j)
        for j in reversed(swaps):
            app = instantiate(rule, seq, index=j)
            steps.append(app)
            seq = app.premises[0]
    return steps


def principal_positions(r: RuleApp) -> tuple[Pos, ...]:
    return r.principal


def premise_slots(r: RuleApp) -> Iterable[PremisePos]:
    return chain.from_iterable(((k, p) for p in s.positions()) for k, s in enumerate(r.premises))
