"""Translations between the calculi.

* ``sk``: linear-modal proofs to classical modal proofs (forget resources);
* ``circ``: replace the modalities by exponentials;
* ``lin``: classical modal proofs to linear-modal proofs, every formula
  becoming a ``!``-formula.

Each translation maps a rule instance to a small block of rules whose open
leaves ("holes") stand for the translated premises.  Sequents are
translated position by position, so ancestor relations, multicut maps and
back-edge alignments carry over unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from .calculus import RuleApp, Sequent, instantiate
from .errors import MucutError
from .formula import BINDERS, Formula, SystemId
from .proof import BackEdge, ProofGraph, RuleNode, Suspension, TreeNode, TreePrefix, child_target

# -- formulas ---------------------------------------------------------------------

_SK_OPS = {"tensor": "and", "with": "and", "par": "or", "plus": "or", "limpl": "impl"}
_SK_UNITS = {"one": "true", "top": "true", "bot": "false", "zero": "false"}


def sk_formula(f: Formula) -> Formula:
    op = f.op
    if op in ("bang", "quest"):
        return sk_formula(f.args[0])
    if op in _SK_UNITS:
        return Formula(_SK_UNITS[op])
    return Formula(_SK_OPS.get(op, op), tuple(sk_formula(a) for a in f.args), f.name)


def circ_formula(f: Formula) -> Formula:
    op = {"box": "bang", "dia": "quest"}.get(f.op, f.op)
    return Formula(op, tuple(circ_formula(a) for a in f.args), f.name)


def _bang(f: Formula) -> Formula:
    return Formula("bang", (f,))


def _quest(f: Formula) -> Formula:
    return Formula("quest", (f,))


_LIN_BIN = {"impl": "limpl", "and": "with", "or": "plus"}


def lin_formula(f: Formula) -> Formula:
    op = f.op
    if op in ("atom", "var"):
        return _bang(f)
    if op == "true":
        return _bang(Formula("top"))
    if op == "false":
        return _bang(Formula("zero"))
    if op in _LIN_BIN:
        return _bang(Formula(_LIN_BIN[op], (_quest(lin_formula(f.args[0])), _quest(lin_formula(f.args[1])))))
    if op == "neg":
        return _bang(Formula("neg", (_quest(lin_formula(f.args[0])),)))
    if op in BINDERS:
        return _bang(Formula(op, (_quest(lin_formula(f.args[0])),), f.name))
    if op == "dia":
        return _bang(Formula("dia", (_quest(lin_formula(f.args[0])),)))
    if op == "box":
        return _bang(Formula("box", (_bang(_quest(lin_formula(f.args[0]))),)))
    raise MucutError(f"{op} is not a classical connective")


def sk_sequent(s: Sequent) -> Sequent:
    return s.map(sk_formula)


def circ_sequent(s: Sequent) -> Sequent:
    return s.map(circ_formula)


def lin_sequent(s: Sequent) -> Sequent:
    return Sequent(tuple(lin_formula(f) for f in s.ante), tuple(_quest(lin_formula(f)) for f in s.succ))


# -- blocks -------------------------------------------------------------------------

@dataclass
class BNode:
    app: RuleApp
    kids: list


Block = Union[BNode, int]


def _chain(seq: Sequent, steps: list, top: Callable[[Sequent], Block]) -> Block:
    """Unary steps bottom-up from ``seq``; ``top`` builds what sits above the last one."""
    if not steps:
        return top(seq)
    rule, p, kw = steps[0]
    app = instantiate(rule, seq, p, **kw)
    return BNode(app, [_chain(app.premises[0], steps[1:], top)])


def _hole(k: int) -> Callable[[Sequent], Block]:
    return lambda seq: k


def _node(seq: Sequent, rule: str, p=None, kids: list | None = None, **kw) -> BNode:
    app = instantiate(rule, seq, p, **kw)
    if kids is None:
        kids = list(range(len(app.premises)))
    return BNode(app, kids)


def _weakenings(seq: Sequent, drop: list, left: str, right: str) -> list:
    """Steps removing the positions in ``drop`` (conclusion positions), leftmost first."""
    steps = []
    gone = {"L": 0, "R": 0}
    for side, i in sorted(drop):
        steps.append((left if side == "L" else right, (side, i - gone[side]), {}))
        gone[side] += 1
    return steps


def _split_parts(app: RuleApp) -> list[list]:
    """Conclusion positions sent to each premise of a context-splitting rule."""
    p = app.params.principal
    others = [q for q in app.conclusion.positions() if q != p]
    parts: list[list] = [[], []]
    for q, v in zip(others, app.params.split):
        parts[v].append(q)
    return parts


# -- skeleton -------------------------------------------------------------------------

_SK_SAME = {"ax", "cut", "ex", "ex_l", "ex_r", "neg_l", "neg_r", "mu_l", "mu_r", "nu_l", "nu_r",
            "box_p", "dia_p", "impl_r", "impl_l", "or_r1", "or_r2", "or_l", "and_l1", "and_l2",
            "and_r", "true_r", "false_l", "w_l", "w_r", "c_l", "c_r"}
_SK_RENAME = {"limpl_r": "impl_r", "limpl_l": "impl_l", "plus_r1": "or_r1", "plus_r2": "or_r2",
              "plus_l": "or_l", "with_l1": "and_l1", "with_l2": "and_l2", "with_r": "and_r",
              "top_r": "true_r", "zero_l": "false_l", "one_l": "w_l", "bot_r": "w_r",
              "wn_w": "w_r", "oc_w": "w_l", "dia_w": "w_r", "box_w": "w_l",
              "wn_c": "c_r", "oc_c": "c_l", "dia_c": "c_r", "box_c": "c_l"}
_SK_ERASE = {"wn_d", "oc_d", "oc_p", "wn_p", "oc_p_dia", "wn_p_box"}


def _same_rule(app: RuleApp, seq: Sequent, rule: str | None = None, fmap=None) -> BNode:
    pr = app.params
    formula = fmap(pr.formula) if (fmap and pr.formula is not None) else pr.formula
    return _node(seq, rule or app.rule, pr.principal, split=pr.split, formula=formula,
                 perm=pr.perm, index=pr.index)


def sk_block(app: RuleApp) -> Block:
    seq = sk_sequent(app.conclusion)
    r, p = app.rule, app.params.principal
    if r in _SK_ERASE:
        return 0
    if r in _SK_SAME:
        return _same_rule(app, seq, fmap=sk_formula)
    if r in _SK_RENAME:
        return _same_rule(app, seq, _SK_RENAME[r])
    if r == "one_r":
        return _node(seq, "true_r", ("R", 0))
    if r == "bot_l":
        return _node(seq, "false_l", ("L", 0))
    if r == "tensor_l":
        return _chain(seq, [("c_l", p, {}), ("and_l1", p, {}), ("and_l2", (p[0], p[1] + 1), {})], _hole(0))
    if r == "par_r":
        return _chain(seq, [("c_r", p, {}), ("or_r1", p, {}), ("or_r2", (p[0], p[1] + 1), {})], _hole(0))
    if r in ("tensor_r", "par_l"):
        parts = _split_parts(app)
        rule = "and_r" if r == "tensor_r" else "or_l"
        top = instantiate(rule, seq, p)
        kids = []
        for k in (0, 1):
            prem = top.premises[k]
            # positions of the other part, read in the premise
            drop = []
            for q in parts[1 - k]:
                (kk, qq), = [t for t in top.ancestors[q] if t[0] == k]
                drop.append(qq)
            kids.append(_chain(prem, _weakenings(prem, drop, "w_l", "w_r"), _hole(k)))
        return BNode(top, kids)
    raise MucutError(f"no skeleton translation for {r}")


# -- modalities to exponentials ---------------------------------------------------------

_CIRC_RENAME = {"dia_c": "wn_c", "dia_w": "wn_w", "box_c": "oc_c", "box_w": "oc_w",
                "oc_p_dia": "oc_p", "wn_p_box": "wn_p"}


def circ_block(app: RuleApp) -> Block:
    seq = circ_sequent(app.conclusion)
    r, p = app.rule, app.params.principal
    if r in _CIRC_RENAME:
        return _same_rule(app, seq, _CIRC_RENAME[r])
    if r in ("box_p", "dia_p"):
        promo = "oc_p" if r == "box_p" else "wn_p"
        steps = [(promo, p, {})]
        steps += [("oc_d", q, {}) for q in app.conclusion.positions() if q[0] == "L" and q != p]
        steps += [("wn_d", q, {}) for q in app.conclusion.positions() if q[0] == "R" and q != p]
        return _chain(seq, steps, _hole(0))
    return _same_rule(app, seq, fmap=circ_formula)


# -- linear translation -------------------------------------------------------------------

def lin_block(app: RuleApp) -> Block:
    seq = lin_sequent(app.conclusion)
    r, p = app.rule, app.params.principal
    pr = app.params
    last_l = ("L", len(app.conclusion.ante))  # where a formula moved to the antecedent lands

    def right_intro(rule: str, after: list) -> Block:
        return _chain(seq, [("wn_d", p, {}), ("oc_p", p, {}), (rule, p, {})] + after, _hole(0))

    if r == "ax":
        return _chain(seq, [("wn_d", ("R", 0), {})], lambda s: _node(s, "ax"))
    if r == "cut":
        top = _node(seq, "cut", formula=_quest(lin_formula(pr.formula)), split=pr.split)
        p1 = top.app.premises[1]
        top.kids = [0, _chain(p1, [("wn_p", ("L", len(p1.ante) - 1), {})], _hole(1))]
        return top
    if r in ("ex", "ex_l", "ex_r"):
        return _same_rule(app, seq)
    if r == "true_r":
        return _chain(seq, [("wn_d", p, {}), ("oc_p", p, {})], lambda s: _node(s, "top_r", p))
    if r == "false_l":
        return _chain(seq, [("oc_d", p, {})], lambda s: _node(s, "zero_l", p))
    if r in ("w_l", "w_r", "c_l", "c_r"):
        return _same_rule(app, seq, {"w_l": "oc_w", "w_r": "wn_w", "c_l": "oc_c", "c_r": "wn_c"}[r])
    if r == "neg_l":
        return _chain(seq, [("oc_d", p, {}), ("neg_l", p, {})], _hole(0))
    if r == "neg_r":
        return right_intro("neg_r", [("wn_p", last_l, {})])
    if r == "impl_r":
        return right_intro("limpl_r", [("wn_p", last_l, {})])
    if r in ("or_r1", "or_r2"):
        return right_intro({"or_r1": "plus_r1", "or_r2": "plus_r2"}[r], [])
    if r in ("mu_r", "nu_r"):
        return right_intro(r, [])
    if r in ("mu_l", "nu_l"):
        return _chain(seq, [("oc_d", p, {}), (r, p, {}), ("wn_p", p, {})], _hole(0))
    if r in ("and_l1", "and_l2"):
        rule = "with_l1" if r == "and_l1" else "with_l2"
        return _chain(seq, [("oc_d", p, {}), (rule, p, {}), ("wn_p", p, {})], _hole(0))
    if r == "and_r":
        return _chain(seq, [("wn_d", p, {}), ("oc_p", p, {})], lambda s: _node(s, "with_r", p))
    if r == "or_l":
        def top(s):
            n = _node(s, "plus_l", p)
            n.kids = [_chain(n.app.premises[k], [("wn_p", p, {})], _hole(k)) for k in (0, 1)]
            return n
        return _chain(seq, [("oc_d", p, {})], top)
    if r == "impl_l":
        def top(s):
            n = _node(s, "limpl_l", p, split=pr.split)
            prem0 = n.app.premises[0]
            (k, b_pos), = [t for t in n.app.ancestors[p] if t[0] == 0]
            n.kids = [_chain(prem0, [("wn_p", b_pos, {})], _hole(0)), 1]
            return n
        return _chain(seq, [("oc_d", p, {})], top)
    if r == "box_p":
        succ_ctx = [q for q in app.conclusion.positions() if q[0] == "R" and q != p]
        ante = [q for q in app.conclusion.positions() if q[0] == "L"]
        steps = []
        for q in succ_ctx + [p]:
            steps += [("wn_d", q, {}), ("oc_p_dia", q, {})]
        steps += [("oc_d", q, {}) for q in ante]
        steps += [("box_p", p, {}), ("oc_p", p, {})]
        for q in ante:
            steps += [("oc_d", q, {}), ("wn_p", q, {})]
        return _chain(seq, steps, _hole(0))
    if r == "dia_p":
        succ = [q for q in app.conclusion.positions() if q[0] == "R"]
        ante = [q for q in app.conclusion.positions() if q[0] == "L"]
        steps = []
        for q in succ:
            steps += [("wn_d", q, {}), ("oc_p_dia", q, {})]
        steps += [("oc_d", q, {}) for q in ante]
        steps += [("dia_p", p, {}), ("wn_p", p, {})]
        for q in ante:
            if q != p:
                steps += [("oc_d", q, {}), ("wn_p", q, {})]
        return _chain(seq, steps, _hole(0))
    raise MucutError(f"no linear translation for {r}")


# -- graphs -----------------------------------------------------------------------------

_SK_SYSTEM = {SystemId.MuLLBox: SystemId.MuLKBox, SystemId.MuLL: SystemId.MuLK, SystemId.LL: SystemId.LK,
              SystemId.MuMALL: SystemId.MuLK, SystemId.MALL: SystemId.LK}
_LIN_SYSTEM = {SystemId.MuLKBox: SystemId.MuLLBox, SystemId.MuLK: SystemId.MuLL,
               SystemId.LKBox: SystemId.MuLLBox, SystemId.LK: SystemId.LL}
_CIRC_SYSTEM = {SystemId.MuLLBox: SystemId.MuLL}

TRANSLATIONS = {
    "skeleton": (sk_block, sk_sequent, sk_formula, _SK_SYSTEM),
    "circ": (circ_block, circ_sequent, circ_formula, _CIRC_SYSTEM),
    "linear": (lin_block, lin_sequent, lin_formula, _LIN_SYSTEM),
}


def _compose_align(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return (tuple(b[0][k] for k in a[0]), tuple(b[1][k] for k in a[1]))


def _mcut_block(app: RuleApp, seq_fn) -> BNode | None:
    if app.rule != "mcut":
        return None
    from .multicut import mcut_app
    m = map_mcut(app.params.mcut, seq_fn)
    return BNode(mcut_app(m), list(range(m.arity)))


def translate_graph(p: ProofGraph, kind: str, canonical: bool = True) -> tuple[ProofGraph, dict[str, str]]:
    """Translate ``p`` node by node; also return the entry node of each source node."""
    block_fn, seq_fn, fmap, systems = TRANSLATIONS[kind]
    reach = p.reachable()
    blocks = {n: _mcut_block(p.nodes[n].app, seq_fn) or block_fn(p.nodes[n].app) for n in reach}
    root_id: dict[str, str] = {}
    for n in reach:
        if not isinstance(blocks[n], int):
            root_id[n] = f"{n}.0"

    def resolve(c) -> object:
        t = child_target(c)
        align = c.align if isinstance(c, BackEdge) else None
        back = isinstance(c, BackEdge)
        seen = set()
        while isinstance(blocks[t], int):
            if t in seen:
                raise MucutError("a cycle of erased rules has no translation")
            seen.add(t)
            c2 = p.nodes[t].children[blocks[t]]
            align = _compose_align(align, c2.align if isinstance(c2, BackEdge) else None)
            back = back or isinstance(c2, BackEdge)
            t = child_target(c2)
        tid = root_id[t]
        return BackEdge(tid, align) if (back or align is not None) else tid

    nodes: dict[str, RuleNode] = {}
    scaffold: set[str] = set()
    for n in reach:
        blk = blocks[n]
        if isinstance(blk, int):
            continue
        counter = [0]
        modal = p.nodes[n].app.rule in ("box_p", "dia_p")
        src_children = p.nodes[n].children

        def emit(b: BNode, nid: str) -> None:
            kids = []
            for k in b.kids:
                if isinstance(k, int):
                    kids.append(resolve(src_children[k]))
                else:
                    counter[0] += 1
                    kid = f"{n}.{counter[0]}"
                    if modal:
                        scaffold.add(kid)
                    emit(k, kid)
                    kids.append(kid)
            nodes[nid] = RuleNode(b.app, tuple(kids))

        emit(blk, f"{n}.0")
    root = resolve(p.root)
    root = child_target(root)
    entry = {}
    for n in reach:
        r = resolve(n)
        entry[n] = child_target(r)
    system = systems.get(p.system, p.system) if p.system is not None else None
    abbrevs = {k: fmap(v) for k, v in p.abbrevs.items()}
    out = ProofGraph(nodes, root, system, p.name, abbrevs)
    if kind == "circ":
        out.scaffold = frozenset(scaffold)
    if canonical:
        can = out.canonical()
        # recover the renaming used by canonical()
        ren = _canonical_renaming(out)
        return can, {n: ren[e] for n, e in entry.items() if e in ren}
    return out, entry


def _canonical_renaming(p: ProofGraph) -> dict[str, str]:
    order: list[str] = []
    seen: set[str] = set()

    def visit(n: str) -> None:
        stack = [n]
        while stack:
            m = stack.pop()
            if m in seen:
                continue
            seen.add(m)
            order.append(m)
            kids = [c for c in p.nodes[m].children if not isinstance(c, BackEdge)]
            stack.extend(reversed(kids))

    visit(p.root)
    i = 0
    while i < len(order):
        for c in p.nodes[order[i]].children:
            t = child_target(c)
            if t not in seen:
                visit(t)
        i += 1
    return {old: f"n{k}" for k, old in enumerate(order)}


def sk_proof(p: ProofGraph) -> ProofGraph:
    return translate_graph(p, "skeleton")[0]


def circ_proof(p: ProofGraph) -> ProofGraph:
    return translate_graph(p, "circ")[0]


def lin_proof(p: ProofGraph) -> ProofGraph:
    return translate_graph(p, "linear")[0]


# -- trees --------------------------------------------------------------------------------------

def map_mcut(m, fn: Callable[[Sequent], Sequent]):
    from .multicut import Mcut
    return Mcut(tuple(fn(s) for s in m.premises), fn(m.conclusion), m.iota, m.ppr)


def sk_tree(t: TreePrefix, depth: int | None = None) -> TreePrefix:
    """Skeleton of a tree prefix, cut at ``depth`` layers when given."""
    from .multicut import mcut_app

    def go(t: TreePrefix, d: int) -> TreePrefix:
        if isinstance(t, Suspension):
            return Suspension(sk_sequent(t.sequent), t.ref)
        if depth is not None and d >= depth:
            return Suspension(sk_sequent(t.conclusion), None)
        if t.app.rule == "mcut":
            app = mcut_app(map_mcut(t.app.params.mcut, sk_sequent))
            return TreeNode(app, tuple(go(c, d + 1) for c in t.children))
        blk = sk_block(t.app)
        return expand(blk, t, d)

    def expand(b: Block, t: TreeNode, d: int) -> TreePrefix:
        if isinstance(b, int):
            return go(t.children[b], d)
        if depth is not None and d >= depth:
            return Suspension(b.app.conclusion, None)
        return TreeNode(b.app, tuple(expand(k, t, d + 1) for k in b.kids))

    return go(t, 0)


class TreeTranslator:
    """Translation of working trees, memoized on node identity."""

    def __init__(self, kind: str = "circ"):
        self.kind = kind
        self.block_fn, self.seq_fn = TRANSLATIONS[kind][0], TRANSLATIONS[kind][1]
        self.memo: dict[int, object] = {}
        self.graphs: dict[int, tuple[ProofGraph, ProofGraph, dict]] = {}

    def graph(self, g: ProofGraph) -> tuple[ProofGraph, dict]:
        hit = self.graphs.get(id(g))
        if hit is None or hit[0] is not g:
            g2, entry = translate_graph(g, self.kind, canonical=False)
            hit = (g, g2, entry)
            self.graphs[id(g)] = hit
        return hit[1], hit[2]

    def node(self, x):
        from .reduction import MNode, SNode, snode
        hit = self.memo.get(x.uid)
        if hit is not None:
            return hit[1]
        if isinstance(x, SNode):
            g2, entry = self.graph(x.graph)
            out = snode(g2, entry[x.node])
        elif isinstance(x, MNode):
            out = MNode(map_mcut(x.mcut, self.seq_fn), [self.node(c) for c in x.children])
        else:
            blk = self.block_fn(x.app)
            modal = x.app.rule in ("box_p", "dia_p")
            if isinstance(blk, int):
                out = self.node(x.children[blk])
            else:
                out = self._expand(blk, x, modal, True)
        self.memo[x.uid] = (x, out)
        return out

    def _expand(self, b: Block, x, modal: bool, root: bool):
        from .reduction import RNode
        if isinstance(b, int):
            return self.node(x.children[b])
        kids = [self._expand(k, x, modal, False) for k in b.kids]
        return RNode(b.app, kids, "scaffold" if (modal and not root) else None)

    def path(self, root, path: tuple[int, ...]) -> tuple[int, ...]:
        """Image of a path of the source tree in the translated tree."""
        from .reduction import MNode, view
        out: list[int] = []
        x = root
        for k in path:
            v = view(x)
            if isinstance(v, MNode):
                out.append(k)
            else:
                out.extend(_hole_path(self.block_fn(v.app), k))
            x = v.children[k]
        return tuple(out)


def _hole_path(b: Block, k: int) -> list[int]:
    if isinstance(b, int):
        return [] if b == k else None  # type: ignore[return-value]
    for j, kid in enumerate(b.kids):
        sub = _hole_path(kid, k)
        if sub is not None:
            return [j] + sub
    return None  # type: ignore[return-value]


def trees_equivalent(a, b) -> bool:
    """Coinductive equality of working trees.

    Maximal chains of derelictions, of contractions or of weakenings are
    compared as a whole: same rules, same top sequent and same position map.
    """
    from .reduction import MNode, SNode, view
    assumed: set[tuple[int, int]] = set()
    todo = [(a, b)]
    while todo:
        x, y = todo.pop()
        if x is y:
            continue
        if isinstance(x, SNode) and isinstance(y, SNode) and x.graph is y.graph and x.node == y.node:
            continue
        key = (x.uid, y.uid)
        if key in assumed:
            continue
        assumed.add(key)
        vx, vy = view(x), view(y)
        if isinstance(vx, MNode) != isinstance(vy, MNode):
            return False
        if isinstance(vx, MNode):
            if vx.mcut != vy.mcut:
                return False
            todo.extend(zip(vx.children, vy.children))
            continue
        cls = _chain_class(vx.app.rule)
        if cls is not None:
            ca, ta, ma = _walk_chain(vx, cls)
            cb, tb, mb = _walk_chain(vy, cls)
            if vx.app.conclusion != vy.app.conclusion or sorted(ca) != sorted(cb) or ma != mb:
                return False
            if ta.conclusion != tb.conclusion:
                return False
            todo.append((ta, tb))
            continue
        if vx.app != vy.app or len(vx.children) != len(vy.children):
            return False
        todo.extend(zip(vx.children, vy.children))
    return True


_CHAIN_CLASSES = ({"wn_d", "oc_d"}, {"wn_c", "oc_c", "dia_c", "box_c"}, {"wn_w", "oc_w", "dia_w", "box_w"})


def _chain_class(rule: str):
    for k, cls in enumerate(_CHAIN_CLASSES):
        if rule in cls:
            return k
    return None


def _walk_chain(x, cls: int):
    """Rules of the maximal chain of class ``cls`` starting at ``x``, the node above it, and the position map."""
    from .reduction import RNode, view
    rules = []
    # top position -> bottom position
    pos = {p: (p,) for p in x.app.conclusion.positions()}
    cur = x
    while isinstance(cur, RNode) and _chain_class(cur.app.rule) == cls:
        rules.append(cur.app.rule)
        desc = cur.app.descendants()
        new = {}
        for (k, q), c in desc.items():
            new.setdefault(q, []).append(c)
        pos = {q: tuple(sorted(p2 for c in cs for p2 in pos[c])) for q, cs in new.items()}
        nxt = cur.children[0]
        cur = view(nxt)
        if not (isinstance(cur, RNode) and _chain_class(cur.app.rule) == cls):
            cur = nxt
            break
    return rules, cur, sorted(pos.items())


@dataclass
class SimulationResult:
    thetas: list
    steps: list
    n: int

    def __iter__(self):
        return iter(self.thetas)

    @property
    def phi(self) -> tuple[int, int]:
        return (0, self.n)


def assemble(results: list[SimulationResult]) -> tuple[list, list[int]]:
    """Glue consecutive simulations into one exponential trace.

    Returns the trees and ``phi``, where ``phi[i]`` indexes the image of the
    i-th modal proof.
    """
    thetas: list = []
    phi: list[int] = []
    for k, res in enumerate(results):
        if k == 0:
            thetas.append(res.thetas[0])
            phi.append(0)
        thetas.extend(res.thetas[1:])
        phi.append(phi[-1] + res.n)
    return thetas, phi


_CIRC_RULE = dict(_CIRC_RENAME, box_p="oc_p", dia_p="wn_p")


def _circ_rules(rules: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(_CIRC_RULE.get(r, r) for r in rules)


def simulate_step(pi0, r, pi1=None, translator: TreeTranslator | None = None) -> SimulationResult:
    """Replay one modal step on the exponential translation.

    Returns the exponential trees ``theta_0 .. theta_n``: ``theta_0`` is the
    translation of ``pi0``, ``theta_n`` that of ``pi1``.  A modal commutation
    is followed by the commutations and key cases of the derelictions it
    leaves behind.
    """
    from .errors import SimulationFailed
    from .reduction import MNode, mcut_redexes, node_at, reduce, view

    T = translator or TreeTranslator("circ")
    if pi1 is None:
        pi1 = reduce(pi0, r)
    theta = T.node(pi0)
    tpath = T.path(pi0, r.node)
    mn = view(node_at(theta, tpath))
    if not isinstance(mn, MNode):
        raise SimulationFailed(f"no multicut at the image of {r.where()}")
    want = (r.kind, r.premises, _circ_rules(r.rules))
    first = [x for x in mcut_redexes(mn, tpath) if (x.kind, x.premises, x.rules) == want]
    if not first:
        raise SimulationFailed(f"{r.kind} {r.rules} has no counterpart")
    thetas = [theta]
    steps = [first[0]]
    theta = reduce(theta, first[0])
    thetas.append(theta)
    if r.kind == "Commutative" and r.rules[0] in ("box_p", "dia_p"):
        path = tpath + (0,)
        for _ in range(10000):
            here = view(node_at(theta, path))
            if not isinstance(here, MNode):
                break
            kids = [view(c) for c in here.children]
            nxt = None
            for x in mcut_redexes(here, path):
                if x.kind == "Commutative" and x.rules[0] in ("wn_d", "oc_d") and kids[x.premises[0]].tag == "scaffold":
                    nxt = x
                    break
                if x.kind == "KeyExp" and any(kids[i].tag == "scaffold" for i in x.premises):
                    nxt = x
                    break
            if nxt is None:
                break
            theta = reduce(theta, nxt)
            thetas.append(theta)
            steps.append(nxt)
            if nxt.kind == "Commutative":
                path = path + (0,)
    target = T.node(pi1)
    if not trees_equivalent(theta, target):
        raise SimulationFailed(f"step {r.kind} {r.rules} at {r.where()} is not simulated")
    return SimulationResult(thetas, steps, len(steps))


def pullback_redex(pi, r_circ, translator: TreeTranslator | None = None):
    """A redex of ``pi`` whose simulation fires ``r_circ``."""
    from .errors import NoPreimage, SimulationFailed
    from .reduction import mcuts, mcut_redexes

    T = translator or TreeTranslator("circ")
    for path, mn, _ in mcuts(pi):
        if T.path(pi, path) != r_circ.node:
            continue
        for r in mcut_redexes(mn, path):
            try:
                sim = simulate_step(pi, r, translator=T)
            except SimulationFailed:
                continue
            if any((s.node, s.kind, s.premises, s.rules) == (r_circ.node, r_circ.kind, r_circ.premises, r_circ.rules)
                   for s in sim.steps):
                return r
    raise NoPreimage(f"no redex of the modal proof is simulated by {r_circ.kind} at {r_circ.where()}")
