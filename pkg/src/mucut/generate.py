"""Random proofs for property tests.

Proofs are grown bottom-up from a target endsequent.  A goal is closed by
an axiom (after weakening what is weakenable), a unit rule, or a back-edge
to a goal below it carrying the same sequent up to exchange.  Attempts
that leave a goal open at the depth bound are thrown away and retried.
"""

from __future__ import annotations

import os
import random
from collections import Counter
from typing import Iterable

from .calculus import RULES, Pos, Sequent, instantiate, rule_in_system
from .errors import MucutError
from .formula import (Atom, Bang, Box, ClFalse, ClTrue, Diamond, Formula, Mu, Nu, Par, Plus, Quest, SystemId,
                      Tensor, Var, With, And, Or, Impl, Neg, LinImpl, Top, is_formula)
from .proof import GraphBuilder, ProofGraph

_NOT_GENERATED = {"mcut", "ex", "ex_l", "ex_r", "ax", "cut"}
_WEAKEN_L = {"w_l": None, "oc_w": "bang", "box_w": "box", "one_l": "one"}
_WEAKEN_R = {"w_r": None, "wn_w": "quest", "dia_w": "dia", "bot_r": "bot"}


def seed_from_env(default: int = 0) -> int:
    """The ``MUCUT_SEED`` environment variable, or ``default``."""
    try:
        return int(os.environ.get("MUCUT_SEED", default))
    except ValueError:
        return default


class _Retry(Exception):
    pass


# -- formula pools -----------------------------------------------------------------

def classical_pool() -> list[Formula]:
    a, b, x = Atom("a"), Atom("b"), Var("X")
    return [a, b, ClTrue, ClFalse, Neg(a), And(a, b), Or(a, b), Impl(a, b), Box(a), Diamond(b),
            Nu("X", x), Mu("X", x), Nu("X", Diamond(x)), Nu("X", Box(x)), Mu("X", Or(ClTrue, x)),
            Nu("X", Or(ClTrue, x)), Nu("X", And(a, x)), Mu("X", Diamond(x))]


def linear_modal_pool() -> list[Formula]:
    a, b, x = Atom("a"), Atom("b"), Var("X")
    return [a, b, Top, Tensor(a, b), Par(a, b), With(a, b), Plus(a, b), LinImpl(a, b),
            Bang(a), Quest(b), Box(Bang(a)), Diamond(Quest(b)), Box(a), Diamond(a),
            Nu("X", x), Mu("X", x), Nu("X", Diamond(x)), Nu("X", Box(x)), Mu("X", Plus(Top, x)),
            Nu("X", Plus(Top, x)), Nu("X", Quest(x)), Mu("X", Bang(x))]


def mall_pool() -> list[Formula]:
    a, b, c = Atom("a"), Atom("b"), Atom("c")
    return [a, b, c, Tensor(a, b), Par(a, b), With(a, b), Plus(b, c), Tensor(Plus(a, b), c),
            Par(a, With(b, c)), With(Tensor(a, b), Par(a, b))]


def random_sequent(rng: random.Random, pool: list[Formula], size: tuple[int, int] = (1, 3)) -> Sequent:
    n = rng.randint(*size)
    ante, succ = [], []
    for _ in range(n):
        (ante if rng.random() < 0.45 else succ).append(rng.choice(pool))
    if not succ:
        succ.append(rng.choice(pool))
    return Sequent(tuple(ante), tuple(succ))


# -- goal closing ---------------------------------------------------------------------

def _weakenable(f: Formula, side: str, system: SystemId) -> str | None:
    table = _WEAKEN_L if side == "L" else _WEAKEN_R
    for rule, op in table.items():
        if rule_in_system(rule, system) and (op is None or f.op == op):
            return rule
    return None


def _alignment(here: Sequent, target: Sequent) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """A bijection sending positions of ``here`` to equal formulas of ``target``."""
    out = []
    for a, b in ((here.ante, target.ante), (here.succ, target.succ)):
        if Counter(a) != Counter(b):
            return None
        used: set[int] = set()
        m = []
        for f in a:
            j = next(j for j, g in enumerate(b) if g == f and j not in used)
            used.add(j)
            m.append(j)
        out.append(tuple(m))
    return out[0], out[1]


def _close_steps(seq: Sequent, system: SystemId) -> list[list[tuple]] | None:
    """Ways to close ``seq`` outright, each a list of steps ending in a nullary rule."""
    ways = []
    units = [("true_r", "R", "true"), ("false_l", "L", "false"), ("top_r", "R", "top"), ("zero_l", "L", "zero")]
    for rule, side, op in units:
        if rule_in_system(rule, system):
            for p, f in seq.items():
                if p[0] == side and f.op == op:
                    ways.append([(rule, p)])
    for i, f in enumerate(seq.ante):
        for j, g in enumerate(seq.succ):
            if f != g:
                continue
            steps = _weaken_all_but(seq, ("L", i), ("R", j), system)
            if steps is not None:
                ways.append(steps + [("ax", None)])
    return ways or None


def _weaken_all_but(seq: Sequent, keep_l: Pos, keep_r: Pos, system: SystemId) -> list[tuple] | None:
    steps = []
    ante = list(range(len(seq.ante)))
    succ = list(range(len(seq.succ)))
    for side, idxs, keep, fs in (("L", ante, keep_l, seq.ante), ("R", succ, keep_r, seq.succ)):
        removed = 0
        for i in idxs:
            if (side, i) == keep:
                continue
            rule = _weakenable(fs[i], side, system)
            if rule is None:
                return None
            steps.append((rule, (side, i - removed)))
            removed += 1
    return steps


# -- the generator ----------------------------------------------------------------------

class ProofGenerator:
    """Bottom-up random proof search over one system."""

    def __init__(self, system: SystemId, pool: list[Formula], rng: random.Random, max_depth: int = 6,
                 cut_rate: float = 0.1, close_rate: float = 0.35, allow_cycles: bool = True):
        self.system = system
        self.pool = [f for f in pool if is_formula(f, system)]
        self.rng = rng
        self.max_depth = max_depth
        self.cut_rate = cut_rate if rule_in_system("cut", system) else 0.0
        self.close_rate = close_rate
        self.allow_cycles = allow_cycles
        self.rules = [r for r in RULES if rule_in_system(r, system) and r not in _NOT_GENERATED]

    def candidates(self, seq: Sequent) -> list:
        out = []
        for rule in self.rules:
            for p in seq.positions():
                kw = {}
                if RULES[rule].arity == 2 and rule not in ("with_r", "and_r", "plus_l", "or_l"):
                    kw["split"] = tuple(self.rng.randint(0, 1) for _ in range(len(seq) - 1))
                try:
                    out.append(instantiate(rule, seq, p, **kw))
                except MucutError:
                    pass
        return out

    def grow(self, seq: Sequent, name: str = "random") -> ProofGraph:
        for _ in range(200):
            gb = GraphBuilder(self.system, name)
            try:
                self._goal(gb, gb.start(seq), [], 0)
                return gb.build()
            except _Retry:
                continue
        raise MucutError(f"could not grow a proof of {seq}")

    def _goal(self, gb: GraphBuilder, hole: str, branch: list[tuple[str, Sequent]], d: int) -> None:
        seq = gb.sequent(hole)
        rng = self.rng
        closing = d >= self.max_depth or rng.random() < self.close_rate
        if closing and self._try_close(gb, hole, branch):
            return
        if d >= self.max_depth:
            raise _Retry()
        if rng.random() < self.cut_rate:
            f = rng.choice(self.pool)
            split = tuple(rng.randint(0, 1) for _ in range(len(seq)))
            kids = gb.apply(hole, "cut", formula=f, split=split)
        else:
            cands = self.candidates(seq)
            if not cands:
                if not self._try_close(gb, hole, branch):
                    raise _Retry()
                return
            kids = gb.apply_app(hole, rng.choice(cands))
        here = branch + [(hole, seq)]
        for k in kids:
            self._goal(gb, k, here, d + 1)

    def _try_close(self, gb: GraphBuilder, hole: str, branch: list[tuple[str, Sequent]]) -> bool:
        seq = gb.sequent(hole)
        if self.allow_cycles and branch:
            targets = [(n, s) for n, s in branch if _alignment(seq, s) is not None]
            if targets:
                n, s = self.rng.choice(targets)
                al = _alignment(seq, s)
                ident = all(k == j for part in al for k, j in enumerate(part))
                gb.back(hole, n, None if ident else al)
                return True
        ways = _close_steps(seq, self.system)
        if not ways:
            return False
        steps = self.rng.choice(ways)
        hole_ = hole
        for rule, p in steps[:-1]:
            (hole_,) = gb.apply(hole_, rule, p)
        gb.apply(hole_, *steps[-1])
        return True


def random_proofs(system: SystemId, count: int, seed: int | None = None, max_depth: int = 6,
                  pool: list[Formula] | None = None, **kw) -> list[ProofGraph]:
    """``count`` random regular proofs over ``system``."""
    rng = random.Random(seed_from_env() if seed is None else seed)
    if pool is None:
        pool = classical_pool() if system.classical else linear_modal_pool()
    gen = ProofGenerator(system, pool, rng, max_depth, **kw)
    out = []
    while len(out) < count:
        seq = random_sequent(rng, gen.pool)
        try:
            out.append(gen.grow(seq, f"random_{len(out)}"))
        except MucutError:
            continue
    return out


# -- MALL cut trees ---------------------------------------------------------------------------

def _mall_variant(f: Formula, rng: random.Random) -> Formula:
    """A formula provably equivalent to ``f`` by commuting binary connectives."""
    if f.op in ("tensor", "par", "with", "plus"):
        a, b = (_mall_variant(x, rng) for x in f.args)
        if rng.random() < 0.5:
            a, b = b, a
        return Formula(f.op, (a, b))
    return f


def mall_cut_trees(count: int, seed: int | None = None, max_redexes: int = 4,
                   max_depth: int = 8) -> list:
    """Working trees: a chain of cuts over random cut-free MALL proofs of ``A |- A'``."""
    from .reduction import MNode, enumerate_redexes
    from .multicut import cut_to_mcut
    from .proof import unfold

    rng = random.Random(seed_from_env() if seed is None else seed)
    pool = mall_pool()
    gen = ProofGenerator(SystemId.MALL, pool, rng, max_depth, cut_rate=0.0, close_rate=0.5, allow_cycles=False)
    out = []
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        f0 = rng.choice(pool[3:])
        links = rng.randint(1, 2)
        chain = [f0]
        for _ in range(links):
            chain.append(_mall_variant(chain[-1], rng))
        try:
            proofs = [gen.grow(Sequent((chain[k],), (chain[k + 1],)), f"p{k}") for k in range(links)]
        except MucutError:
            continue
        trees = [_to_working(unfold(p, 10 ** 6)) for p in proofs]
        # cut the chain together from the right
        tree = trees[-1]
        for k in range(links - 2, -1, -1):
            concl = Sequent((chain[k],), (chain[-1],))
            cut = instantiate("cut", concl, formula=chain[k + 1], split=(0, 1))
            tree = MNode(cut_to_mcut(cut), [trees[k], tree])
        if not isinstance(tree, MNode):
            continue
        if len(enumerate_redexes(tree)) > max_redexes:
            continue
        out.append(tree)
    return out


def _to_working(t):
    from .reduction import RNode
    return RNode(t.app, [_to_working(c) for c in t.children])


def mall_linkings(t) -> frozenset:
    """Additive slices of a cut-free finite MALL tree, each a set of axiom links.

    An occurrence is named by its endsequent position and the argument path
    leading to the subformula.
    """
    from .reduction import MNode, view

    def go(x, addr: dict) -> set[frozenset]:
        v = view(x)
        if isinstance(v, MNode):
            raise MucutError("linkings are defined on cut-free trees")
        app = v.app
        r = app.rule
        if r == "ax":
            return {frozenset({("link", addr[("L", 0)], addr[("R", 0)])})}
        if r in ("top_r", "zero_l"):
            return {frozenset({(r, addr[app.params.principal], tuple(sorted(addr.values())))})}
        p = app.params.principal
        prem_addr = [dict() for _ in app.premises]
        for (k, q), c in app.descendants().items():
            base = addr[c]
            if c == p and r not in _STRUCTURAL_NAMES:
                base = base + (_arg_index(app, k, q),)
            prem_addr[k][q] = base
        if r == "with_r" or r == "plus_l":
            out: set[frozenset] = set()
            for k in (0, 1):
                for s in go(v.children[k], prem_addr[k]):
                    out.add(s | {("slice", addr[p], k)})
            return out
        if len(app.premises) == 2:
            return {a | b for a in go(v.children[0], prem_addr[0]) for b in go(v.children[1], prem_addr[1])}
        return go(v.children[0], prem_addr[0])

    root = view(t)
    start = {q: (q,) for q in root.conclusion.positions()}
    return frozenset(go(t, start))


_STRUCTURAL_NAMES = {"ex", "ex_l", "ex_r"}


def _arg_index(app, k: int, q: Pos) -> int:
    r = app.rule
    if r in ("plus_r1", "with_l1"):
        return 0
    if r in ("plus_r2", "with_l2"):
        return 1
    if r in ("tensor_l", "par_r"):
        return 0 if q == app.params.principal else 1
    return k


def normal_forms(tree, budget: int = 200000, observer=None) -> tuple[set, int]:
    """Every normal form reachable from ``tree`` under every redex order.

    Returns the set of linking sets and the number of steps fired.
    ``observer(redex, old, new)`` is called after each step.
    """
    from .reduction import enumerate_redexes, reduce, to_prefix

    seen: dict = {}
    forms: set = set()
    steps = 0
    stack = [tree]
    while stack:
        x = stack.pop()
        key = to_prefix(x, 10 ** 6)
        if key in seen:
            continue
        seen[key] = True
        rs = enumerate_redexes(x)
        if not rs:
            forms.add(mall_linkings(x))
            continue
        for r in rs:
            y = reduce(x, r)
            if observer is not None:
                observer(r, x, y)
            stack.append(y)
            steps += 1
            if steps > budget:
                raise MucutError("enumeration budget exceeded")
    return forms, steps


def iter_orders(tree, limit: int | None = None) -> Iterable:
    """Every maximal reduction sequence from ``tree``, as (redex list, normal form) pairs."""
    from .reduction import enumerate_redexes, reduce
    count = 0
    stack = [(tree, [])]
    while stack:
        x, path = stack.pop()
        rs = enumerate_redexes(x)
        if not rs:
            yield path, x
            count += 1
            if limit is not None and count >= limit:
                return
            continue
        for r in rs:
            stack.append((reduce(x, r), path + [r]))
