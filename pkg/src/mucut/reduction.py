"""Multicut reduction on lazily unfolded proof trees.

A working proof is a tree of immutable nodes:

* :class:`RNode`, an ordinary rule with its subtrees;
* :class:`MNode`, a multicut with its premise subtrees;
* :class:`SNode`, a not yet unfolded node of a proof graph.

Unfolding an ``SNode`` is memoized, so every occurrence of the same graph
node shares one subtree.  A reduction step rebuilds the path from the root
to the fired multicut and leaves everything else untouched.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

from .calculus import (CONTRACTIONS, EXCHANGES, MODAL_PROMOTIONS, PROMOTIONS, WEAKENINGS,
                       Pos, RuleApp, Sequent, instantiate)
from .errors import InvalidInput, MucutError, NotFireable
from .multicut import Mcut, PPos, init_reduction, local, mcut_app, mcut_wellformed, ppos, restrict
from .proof import BackEdge, Defect, ProofGraph, Suspension, TreeNode, TreePrefix, alignment_exchange, child_target

_uids = itertools.count()


class RNode:
    __slots__ = ("app", "children", "uid", "tag")

    def __init__(self, app: RuleApp, children: Iterable["Node"], tag: str | None = None):
        self.app = app
        self.children = tuple(children)
        self.uid = next(_uids)
        self.tag = tag

    @property
    def conclusion(self) -> Sequent:
        return self.app.conclusion

    def __repr__(self) -> str:
        return f"RNode({self.app.rule}, {self.app.conclusion})"


class MNode:
    __slots__ = ("mcut", "children", "uid")

    def __init__(self, mcut: Mcut, children: Iterable["Node"]):
        self.mcut = mcut
        self.children = tuple(children)
        self.uid = next(_uids)

    @property
    def conclusion(self) -> Sequent:
        return self.mcut.conclusion

    def __repr__(self) -> str:
        return f"MNode({self.mcut.arity}, {self.mcut.conclusion})"


class SNode:
    __slots__ = ("graph", "node", "uid", "_view")

    def __init__(self, graph: ProofGraph, node: str):
        self.graph = graph
        self.node = node
        self.uid = next(_uids)
        self._view = None

    @property
    def conclusion(self) -> Sequent:
        return self.graph.nodes[self.node].app.conclusion

    def unfold(self) -> Union[RNode, MNode]:
        if self._view is None:
            g = self.graph
            node = g.nodes[self.node]
            kids: list[Node] = []
            for prem, c in zip(node.app.premises, node.children):
                target = snode(g, child_target(c))
                if isinstance(c, BackEdge) and c.align is not None:
                    kids.append(RNode(alignment_exchange(prem, c), (target,)))
                else:
                    kids.append(target)
            if node.app.rule == "mcut":
                self._view = MNode(node.app.params.mcut, kids)
            else:
                tag = "scaffold" if self.node in getattr(g, "scaffold", ()) else None
                self._view = RNode(node.app, kids, tag)
        return self._view

    def __repr__(self) -> str:
        return f"SNode({self.graph.name}:{self.node})"


Node = Union[RNode, MNode, SNode]


def snode(g: ProofGraph, nid: str) -> SNode:
    cache = g.__dict__.setdefault("_snodes", {})
    if nid not in cache:
        cache[nid] = SNode(g, nid)
    return cache[nid]


def view(x: Node) -> Union[RNode, MNode]:
    return x.unfold() if isinstance(x, SNode) else x


def working_tree(p: ProofGraph) -> Node:
    """The root of a working tree for ``p``; the lowest cut of each branch becomes a multicut."""
    return _root_of(init_reduction(p))


def _root_of(g: ProofGraph) -> Node:
    return snode(g, g.root)


# -- redexes -------------------------------------------------------------------------

Path = tuple[int, ...]


@dataclass(frozen=True)
class Redex:
    node: Path
    kind: str
    premises: tuple[int, ...]
    rules: tuple[str, ...]
    positions: tuple[PPos, ...] = ()

    def where(self) -> str:
        return path_text(self.node)

    def line(self, step: int) -> str:
        return f"step {step}: {self.kind} at {self.where()} [{', '.join(self.rules)}]"


def path_text(path: Path) -> str:
    return "/" + "/".join(str(k) for k in path)


# principal pairs: right rule -> left rules
_DUAL = {
    "mu_r": {"mu_l"}, "nu_r": {"nu_l"}, "tensor_r": {"tensor_l"}, "par_r": {"par_l"},
    "limpl_r": {"limpl_l"}, "neg_r": {"neg_l"}, "plus_r1": {"plus_l"}, "plus_r2": {"plus_l"},
    "with_r": {"with_l1", "with_l2"}, "one_r": {"one_l"}, "bot_r": {"bot_l"},
}
_KEY = {"wn_d": {"wn_p", "wn_p_box"}, "oc_p": {"oc_d"}, "oc_p_dia": {"oc_d"}}
PROMO_LIKE = PROMOTIONS | MODAL_PROMOTIONS
_SHARING = {"with_r", "plus_l"}
_SPLITTING = {"tensor_r", "par_l", "limpl_l"}
_ERASING = {"top_r", "zero_l"}
_TERMINAL = {"ax", "one_r", "bot_l"}


def _principal(app: RuleApp) -> Pos | None:
    if app.rule == "one_r":
        return ("R", 0)
    if app.rule == "bot_l":
        return ("L", 0)
    if app.params.principal is not None:
        return app.params.principal
    return app.principal[0] if app.principal else None


def _dual(r1: str, r2: str) -> bool:
    return r2 in _DUAL.get(r1, ()) or r1 in _DUAL.get(r2, ())


def _key_pair(r1: str, r2: str) -> bool:
    return r2 in _KEY.get(r1, ()) or r1 in _KEY.get(r2, ())


# -- building new multicuts --------------------------------------------------------------

class _NewMcut:
    """Premises and relations of a multicut derived from an old one."""

    def __init__(self, m: Mcut):
        self.m = m
        self.prem: list[Sequent] = []
        self.trees: list[Node] = []
        self.pmap: dict[PPos, PPos] = {}
        self.links: list[tuple[PPos, PPos]] = []

    def keep(self, i: int, tree: Node, target: dict | None = None) -> int:
        k = len(self.prem)
        self.prem.append(self.m.premises[i])
        self.trees.append(tree)
        tgt = self.pmap if target is None else target
        for p in self.m.premises[i].positions():
            tgt[ppos(i, p)] = ppos(k, p)
        return k

    def open(self, i: int, app: RuleApp, trees: tuple, ks: Iterable[int], principal: Pos | None) -> list[PPos]:
        """Replace premise ``i`` by premises ``ks`` of ``app``; return the new places of the actives."""
        new = {}
        for k in ks:
            new[k] = len(self.prem)
            self.prem.append(app.premises[k])
            self.trees.append(trees[k])
        for p in app.conclusion.positions():
            if p == principal:
                continue
            for k, y in app.ancestors.get(p, ()):
                if k in new:
                    self.pmap[ppos(i, p)] = ppos(new[k], y)
        if principal is None:
            return []
        return [ppos(new[k], y) for k, y in app.ancestors[principal] if k in new]

    def old_links(self) -> list[tuple[PPos, PPos]]:
        out = []
        for link in self.m.ppr:
            a, b = sorted(link)
            if a in self.pmap and b in self.pmap:
                out.append((self.pmap[a], self.pmap[b]))
        return out

    def build(self, conclusion: Sequent, iota: list[tuple[Pos, PPos]], links: list | None = None) -> MNode:
        allp = self.old_links() + self.links + (links or [])
        m = Mcut(tuple(self.prem), conclusion, tuple(iota), frozenset(frozenset(l) for l in allp))
        return MNode(m, self.trees)


def _pair_actives(xs: list[PPos], ys: list[PPos], prem: list[Sequent]) -> list[tuple[PPos, PPos]]:
    """Link actives of a principal pair: opposite sides, equal formulas, in order."""
    out = []
    free = list(ys)
    for x in xs:
        fx = prem[x[0]].at(local(x))
        for y in free:
            if y[1] != x[1] and prem[y[0]].at(local(y)) == fx:
                out.append((x, y))
                free.remove(y)
                break
        else:
            raise NotFireable(f"no partner for active {x}")
    if free:
        raise NotFireable("actives left unpaired")
    return out


def _conc_iota(m: Mcut, r2: RuleApp, k: int, pmap: dict[PPos, PPos], principal: Pos | None,
               actives: list[PPos] | None = None) -> list[tuple[Pos, PPos]]:
    """Iota of the multicut sitting on premise ``k`` of the commuted rule ``r2``."""
    iota = []
    for c, q in m.iota:
        targets = [y for kk, y in r2.ancestors[c] if kk == k]
        if c == principal:
            for y, a in zip(targets, actives or []):
                iota.append((y, a))
            continue
        for y in targets:
            if q in pmap:
                iota.append((y, pmap[q]))
    return iota


# -- the steps -------------------------------------------------------------------------------

@dataclass
class StepResult:
    node: Node                      # replacement for the multicut
    successors: list[MNode]         # multicuts the old one turned into
    inherit: dict[int, int] = field(default_factory=dict)   # new premise uid -> nothing; reserved


def _views(mn: MNode) -> list[Union[RNode, MNode]]:
    return [view(c) for c in mn.children]


def _fire(mn: MNode, r: Redex) -> StepResult:
    m = mn.mcut
    kids = _views(mn)
    kind = r.kind
    if kind == "ExAbsorb" or kind == "CutAbsorb":
        (i,) = r.premises
        t = kids[i]
        nm = _NewMcut(m)
        for j in range(m.arity):
            if j == i:
                nm.open(i, t.app, t.children, range(t.app.arity), None)
            else:
                nm.keep(j, mn.children[j])
        links = []
        if kind == "CutAbsorb":
            p1 = t.app.premises[1]
            links.append((ppos(i, ("R", 0)), ppos(i + 1, ("L", len(p1.ante) - 1))))
        iota = [(c, nm.pmap[q]) for c, q in m.iota]
        new = nm.build(m.conclusion, iota, links)
        return StepResult(new, [new])
    if kind == "Axiom":
        (i,) = r.premises
        t = kids[i]
        if m.arity == 1:
            return StepResult(_terminal(t.app.rule, m.conclusion), [])
        nm = _NewMcut(m)
        for j in range(m.arity):
            if j != i:
                nm.keep(j, mn.children[j])
        a, b = ppos(i, ("L", 0)), ppos(i, ("R", 0))
        pa, pb = m.partner(a), m.partner(b)
        inv = m.iota_inverse
        iota = [(c, nm.pmap[q]) for c, q in m.iota if q[0] != i]
        links = []
        if pa is not None and pb is not None:
            links.append((nm.pmap[pa], nm.pmap[pb]))
        elif pa is not None:
            iota.append((inv[b], nm.pmap[pa]))
        elif pb is not None:
            iota.append((inv[a], nm.pmap[pb]))
        else:
            raise NotFireable("axiom premise is not connected")
        new = nm.build(m.conclusion, iota, links)
        return StepResult(new, [new])
    if kind == "Commutative":
        return _commute(mn, kids, r)
    if kind in ("Principal", "KeyExp"):
        return _principal_step(mn, kids, r)
    if kind == "StructPrincipal":
        return _struct_step(mn, kids, r)
    raise NotFireable(f"unknown redex kind {kind}")


def _terminal(rule: str, concl: Sequent) -> RNode:
    try:
        if rule == "ax":
            return RNode(instantiate("ax", concl), ())
        return RNode(instantiate(rule, concl), ())
    except MucutError as e:
        raise NotFireable(str(e)) from e


def _commute(mn: MNode, kids: list, r: Redex) -> StepResult:
    m = mn.mcut
    (i,) = r.premises[:1]
    t = kids[i]
    app = t.app
    rule = app.rule
    if rule in _TERMINAL:
        return StepResult(_terminal(rule, m.conclusion), [])
    p = _principal(app)
    c = m.iota_inverse[ppos(i, p)]
    if rule in _ERASING:
        return StepResult(RNode(instantiate(rule, m.conclusion, c), ()), [])
    if rule in MODAL_PROMOTIONS:
        # every premise is a modal rule; open all of them in place
        try:
            r2 = instantiate(rule, m.conclusion, c)
        except MucutError as e:
            raise NotFireable(str(e)) from e
        nm = _NewMcut(m)
        for j in range(m.arity):
            tj = kids[j]
            nm.open(j, tj.app, tj.children, (0,), None)
        iota = _conc_iota(m, r2, 0, nm.pmap, None)
        new = nm.build(r2.premises[0], iota)
        return StepResult(RNode(r2, (new,)), [new])
    if rule in _SPLITTING:
        return _commute_split(mn, kids, r, i, app, p, c)
    try:
        r2 = instantiate(rule, m.conclusion, c)
    except MucutError as e:
        raise NotFireable(str(e)) from e
    outs = []
    for k in range(app.arity):
        nm = _NewMcut(m)
        actives: list[PPos] = []
        for j in range(m.arity):
            if j == i:
                actives = nm.open(i, app, t.children, (k,), p)
            else:
                nm.keep(j, mn.children[j])
        iota = _conc_iota(m, r2, k, nm.pmap, c, actives)
        outs.append(nm.build(r2.premises[k], iota))
    return StepResult(RNode(r2, outs), outs)


def _commute_split(mn: MNode, kids: list, r: Redex, i: int, app: RuleApp, p: Pos, c: Pos) -> StepResult:
    m = mn.mcut
    t = kids[i]
    others = [q for q in app.conclusion.positions() if q != p]
    part = dict(zip(others, app.params.split))
    groups = []
    for k in (0, 1):
        occs = [ppos(i, q) for q in others if part[q] == k and ppos(i, q) not in m.iota_inverse]
        groups.append(restrict(m, occs) if occs else set())
    # conclusion split
    split = []
    for x in m.conclusion.positions():
        if x == c:
            continue
        q = m.iota_map[x]
        if q[0] == i:
            split.append(part[local(q)])
        else:
            split.append(0 if q[0] in groups[0] else 1)
            if q[0] not in groups[0] and q[0] not in groups[1]:
                raise NotFireable("premise outside both halves")
    try:
        r2 = instantiate(app.rule, m.conclusion, c, split=split)
    except MucutError as e:
        raise NotFireable(str(e)) from e
    outs = []
    for k in (0, 1):
        nm = _NewMcut(m)
        actives: list[PPos] = []
        for j in range(m.arity):
            if j == i:
                actives = nm.open(i, app, t.children, (k,), p)
            elif j in groups[k]:
                nm.keep(j, mn.children[j])
        iota = _conc_iota(m, r2, k, nm.pmap, c, actives)
        outs.append(nm.build(r2.premises[k], iota))
    return StepResult(RNode(r2, outs), outs)


def _principal_step(mn: MNode, kids: list, r: Redex) -> StepResult:
    m = mn.mcut
    i, j = r.premises
    ti, tj = kids[i], kids[j]
    pi, pj = _principal(ti.app), _principal(tj.app)
    nm = _NewMcut(m)
    acts: dict[int, list[PPos]] = {}

    def branch(t, other) -> tuple[int, ...]:
        rule = t.app.rule
        if rule in ("plus_l", "with_r"):
            return (0,) if other.app.rule in ("plus_r1", "with_l1") else (1,)
        return tuple(range(t.app.arity))

    for k in range(m.arity):
        if k == i:
            acts[i] = nm.open(i, ti.app, ti.children, branch(ti, tj), pi)
        elif k == j:
            acts[j] = nm.open(j, tj.app, tj.children, branch(tj, ti), pj)
        else:
            nm.keep(k, mn.children[k])
    links = _pair_actives(acts[i], acts[j], nm.prem)
    iota = [(c, nm.pmap[q]) for c, q in m.iota]
    new = nm.build(m.conclusion, iota, links)
    return StepResult(new, [new])


_WEAK_RULE = {("L", "bang"): "oc_w", ("L", "box"): "box_w", ("R", "quest"): "wn_w", ("R", "dia"): "dia_w"}
_CONTR_RULE = {("L", "bang"): "oc_c", ("L", "box"): "box_c", ("R", "quest"): "wn_c", ("R", "dia"): "dia_c"}


def _burst_order(positions: list[Pos], seq: Sequent) -> list[Pos]:
    """Modal formulas first, then exponential ones; antecedent before succedent, left to right."""
    def key(x: Pos):
        modal = seq.at(x).op in ("box", "dia")
        return (0 if modal else 1, 0 if x[0] == "L" else 1, x[1])
    return sorted(positions, key=key)


def _struct_step(mn: MNode, kids: list, r: Redex) -> StepResult:
    m = mn.mcut
    (i,) = r.premises[:1]
    t = kids[i]
    app = t.app
    p = _principal(app)
    q = ppos(i, p)
    D = restrict(m, {q})
    for d in D:
        if kids[d].app.rule not in PROMO_LIKE:
            raise NotFireable("context is not made of promotions")
    S = m.conclusion
    lost = [x for x in S.positions() if m.iota_map[x][0] in D]
    table = _WEAK_RULE if app.rule in WEAKENINGS else _CONTR_RULE
    for x in lost:
        if (x[0], S.at(x).op) not in table:
            raise NotFireable(f"{S.at(x)} cannot be weakened or contracted")
    order = _burst_order(lost, S)
    if app.rule in WEAKENINGS:
        nm = _NewMcut(m)
        for k in range(m.arity):
            if k == i:
                nm.open(i, app, t.children, (0,), p)
            elif k not in D:
                nm.keep(k, mn.children[k])
        # bottom-up weakenings
        apps = []
        seq = S
        cur = {x: x for x in S.positions()}
        for x in order:
            a = instantiate(table[(x[0], S.at(x).op)], seq, cur[x])
            apps.append(a)
            seq = a.premises[0]
            cur = {y: (y[0], v[1] - 1 if (y[0] == x[0] and v[1] > cur[x][1]) else v[1])
                   for y, v in cur.items() if y != x}
        iota = [(cur[x], nm.pmap[m.iota_map[x]]) for x in S.positions() if x not in lost]
        new = nm.build(seq, iota)
        top: Node = new
        for a in reversed(apps):
            top = RNode(a, (top,))
        return StepResult(top, [new])
    # contraction: duplicate D after the last of its premises
    nm = _NewMcut(m)
    cmap: dict[PPos, PPos] = {}
    actives: list[PPos] = []
    last = max(D)
    for k in range(m.arity):
        if k == i:
            actives = nm.open(i, app, t.children, (0,), p)
        else:
            nm.keep(k, mn.children[k])
        if k == last:
            for d in sorted(D):
                nm.keep(d, mn.children[d], cmap)
    partner = m.partner(q)
    links = [(actives[0], nm.pmap[partner]), (actives[1], cmap[partner])]
    for link in m.ppr:
        a, b = sorted(link)
        if a in cmap and b in cmap:
            links.append((cmap[a], cmap[b]))
    apps = []
    seq = S
    cur = {x: x for x in S.positions()}
    for x in order:
        a = instantiate(table[(x[0], S.at(x).op)], seq, cur[x])
        apps.append(a)
        seq = a.premises[0]
        cur = {y: (y[0], v[1] + 1 if (y[0] == x[0] and v[1] > cur[x][1]) else v[1]) for y, v in cur.items()}
    iota = []
    for x in S.positions():
        qq = m.iota_map[x]
        if x in lost:
            iota.append((cur[x], nm.pmap[qq]))
            iota.append(((x[0], cur[x][1] + 1), cmap[qq]))
        else:
            iota.append((cur[x], nm.pmap[qq]))
    new = nm.build(seq, iota, links)
    top = new
    for a in reversed(apps):
        top = RNode(a, (top,))
    return StepResult(top, [new])


# -- enumeration -------------------------------------------------------------------------------

def mcut_redexes(mn: MNode, path: Path = ()) -> list[Redex]:
    """Fireable redexes of one multicut (descriptors only)."""
    out = []
    for r, _ in _mcut_redexes_and_results(mn):
        out.append(Redex(path, r.kind, r.premises, r.rules, r.positions))
    return out


_RESULT_CACHE: dict[int, list] = {}


def _mcut_redexes_and_results(mn: MNode) -> list[tuple[Redex, StepResult]]:
    hit = _RESULT_CACHE.get(mn.uid)
    if hit is not None and hit[0] is mn:
        return hit[1]
    cands = _candidates(mn)
    res = []
    for r in cands:
        try:
            res.append((r, _fire(mn, r)))
        except NotFireable:
            continue
    if len(_RESULT_CACHE) > 200000:
        _RESULT_CACHE.clear()
    _RESULT_CACHE[mn.uid] = (mn, res)
    return res


def _candidates(mn: MNode) -> list[Redex]:
    m = mn.mcut
    kids = _views(mn)
    out: list[Redex] = []
    inv = m.iota_inverse
    for i, t in enumerate(kids):
        if isinstance(t, MNode):
            continue
        app = t.app
        rule = app.rule
        if rule in EXCHANGES:
            out.append(Redex((), "ExAbsorb", (i,), (rule,)))
            continue
        if rule == "cut":
            out.append(Redex((), "CutAbsorb", (i,), (rule,)))
            continue
        if rule in _TERMINAL and m.arity == 1:
            out.append(Redex((), "Axiom" if rule == "ax" else "Commutative", (i,), (rule,)))
            continue
        if rule == "ax":
            out.append(Redex((), "Axiom", (i,), (rule,)))
            continue
        p = _principal(app)
        if p is None:
            continue
        q = ppos(i, p)
        if q in inv:
            if rule in PROMOTIONS:
                if all(isinstance(kids[j], RNode) and kids[j].app.rule in PROMO_LIKE
                       for j in range(m.arity) if j != i):
                    out.append(Redex((), "Commutative", (i,), (rule,), (q,)))
            elif rule in MODAL_PROMOTIONS:
                if all(not isinstance(kids[j], MNode) and kids[j].app.rule in MODAL_PROMOTIONS
                       for j in range(m.arity)):
                    out.append(Redex((), "Commutative", (i,), (rule,), (q,)))
            else:
                out.append(Redex((), "Commutative", (i,), (rule,), (q,)))
            continue
        partner = m.partner(q)
        if partner is None:
            continue
        if rule in WEAKENINGS or rule in CONTRACTIONS:
            out.append(Redex((), "StructPrincipal", (i,), (rule,), (q, partner)))
            continue
        j = partner[0]
        if j < i:
            continue
        tj = kids[j]
        if isinstance(tj, MNode) or _principal(tj.app) != local(partner):
            continue
        r2 = tj.app.rule
        if _dual(rule, r2):
            out.append(Redex((), "Principal", (i, j), (rule, r2), (q, partner)))
        elif _key_pair(rule, r2):
            out.append(Redex((), "KeyExp", (i, j), (rule, r2), (q, partner)))
    return out


def node_at(root: Node, path: Path) -> Node:
    x = root
    for k in path:
        x = view(x).children[k]
    return x


def replace_at(root: Node, path: Path, new: Node) -> Node:
    if not path:
        return new
    chain = [view(root)]
    for k in path[:-1]:
        chain.append(view(chain[-1].children[k]))
    cur = new
    for parent, k in zip(reversed(chain), reversed(path)):
        kids = list(parent.children)
        kids[k] = cur
        if isinstance(parent, MNode):
            cur = MNode(parent.mcut, kids)
        else:
            cur = RNode(parent.app, kids, parent.tag)
    return cur


def mcuts(root: Node, depth: int | None = None, weight: Callable[[RuleApp], int] | None = None
          ) -> list[tuple[Path, MNode, int]]:
    """Multicuts reachable through rule nodes, with their depth (rules below them)."""
    out = []
    stack: list[tuple[Node, Path, int]] = [(root, (), 0)]
    while stack:
        x, path, d = stack.pop()
        if depth is not None and d > depth:
            continue
        v = view(x)
        if isinstance(v, MNode):
            out.append((path, v, d))
            continue
        w = 1 if weight is None else weight(v.app)
        for k in reversed(range(len(v.children))):
            stack.append((v.children[k], path + (k,), d + w))
    return out


def enumerate_redexes(root: Node, frontier: int | None = None) -> list[Redex]:
    out = []
    for path, mn, _ in mcuts(root, frontier):
        out.extend(mcut_redexes(mn, path))
    return out


def reduce_step(root: Node, r: Redex) -> tuple[Node, StepResult, MNode]:
    mn = view(node_at(root, r.node))
    if not isinstance(mn, MNode):
        raise NotFireable(f"no multicut at {path_text(r.node)}")
    for r2, res in _mcut_redexes_and_results(mn):
        if (r2.kind, r2.premises, r2.rules) == (r.kind, r.premises, r.rules):
            return replace_at(root, r.node, res.node), res, mn
    raise NotFireable(f"{r.kind} {r.rules} is not fireable at {path_text(r.node)}")


def reduce(root: Node, r: Redex) -> Node:
    return reduce_step(root, r)[0]


def _redex_keys(mn: MNode, path: Path) -> list[tuple[tuple, Redex]]:
    kids = mn.children
    seen: dict[tuple, int] = {}
    out = []
    for r in mcut_redexes(mn, path):
        base = (r.kind, tuple(kids[i].uid for i in r.premises))
        n = seen.get(base, 0)
        seen[base] = n + 1
        out.append(((mn.uid,) + base + (n,), r))
    return out


def residuals_after(root: Node, fired: Redex, other: Redex) -> set[Redex]:
    new_root, res, old = reduce_step(root, fired)
    if other.node != fired.node:
        # untouched multicut: same node at the same place
        mn = view(node_at(root, other.node))
        return {r for r in mcut_redexes(mn, other.node) if r == other}
    if other == fired:
        return set()
    kids = old.children
    want = (other.kind, tuple(kids[i].uid for i in other.premises))
    out = set()
    for path, mn, _ in mcuts(new_root):
        if not any(mn is s for s in res.successors):
            continue
        for key, r in _redex_keys(mn, path):
            if key[1:3] == want:
                out.add(r)
    return out


# -- trees to prefixes ------------------------------------------------------------------------

def to_prefix(root: Node, depth: int) -> TreePrefix:
    """The first ``depth`` layers of the working tree; multicuts are kept as nodes."""
    def go(x: Node, d: int) -> TreePrefix:
        if d <= 0:
            return Suspension(x.conclusion, x.node if isinstance(x, SNode) else None)
        v = view(x)
        app = v.app if isinstance(v, RNode) else mcut_app(v.mcut)
        return TreeNode(app, tuple(go(c, d - 1) for c in v.children))

    return go(root, depth)


def tree_size(root: Node, limit: int = 10 ** 6) -> int:
    seen = set()
    stack = [root]
    while stack and len(seen) < limit:
        x = stack.pop()
        if isinstance(x, SNode) or x.uid in seen:
            continue
        seen.add(x.uid)
        stack.extend(x.children)
    return len(seen)


def check_tree(root: Node, only: set[int] | None = None) -> list[Defect]:
    """Local shape check of the unfolded part of a working tree (or of the nodes in ``only``)."""
    out: list[Defect] = []
    seen = set()
    stack = [root]
    while stack:
        x = stack.pop()
        if isinstance(x, SNode) or x.uid in seen:
            continue
        seen.add(x.uid)
        stack.extend(x.children)
        if only is not None and x.uid not in only:
            continue
        name = f"u{x.uid}"
        if isinstance(x, MNode):
            for d in mcut_wellformed(x.mcut):
                out.append(Defect(name, d.kind, d.reason))
            prems = x.mcut.premises
        else:
            app = x.app
            try:
                kw = dict(split=app.params.split, formula=app.params.formula, perm=app.params.perm,
                          index=app.params.index)
                again = instantiate(app.rule, app.conclusion, app.params.principal, **kw)
                if again.premises != app.premises:
                    out.append(Defect(name, "ShapeError", f"{app.rule} premises do not match"))
            except MucutError as e:
                out.append(Defect(name, "ShapeError", str(e)))
            prems = app.premises
        if len(prems) != len(x.children):
            out.append(Defect(name, "ArityError", "wrong number of children"))
            continue
        for k, (s, c) in enumerate(zip(prems, x.children)):
            if c.conclusion != s:
                out.append(Defect(name, "PremiseMismatch", f"child {k} concludes {c.conclusion}, expected {s}"))
    return out


def new_nodes(old_root: Node, new_root: Node) -> set[int]:
    """Uids of materialized nodes of ``new_root`` that are not in ``old_root``."""
    def nodes(r: Node) -> set[int]:
        seen = set()
        stack = [r]
        while stack:
            x = stack.pop()
            if isinstance(x, SNode) or x.uid in seen:
                continue
            seen.add(x.uid)
            stack.extend(x.children)
        return seen

    return nodes(new_root) - nodes(old_root)


# -- fair reduction ------------------------------------------------------------------------------

CUT_FREE = "CutFreeToDepth"
FUEL_OUT = "FuelExhausted"


@dataclass
class TraceEntry:
    step: int
    redex: Redex
    endsequent: Sequent
    age: int = 0
    queue: int = 0

    def line(self) -> str:
        return self.redex.line(self.step)

    def record(self) -> dict:
        r = self.redex
        return {"step": self.step, "kind": r.kind, "node": r.where(), "rules": list(r.rules),
                "premises": list(r.premises), "endsequent": str(self.endsequent),
                "age": self.age, "queue": self.queue}


@dataclass
class ReductionTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    prefix: TreePrefix | None = None

    def lines(self) -> list[str]:
        return [e.line() for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


class FairReducer:
    """Oldest-first scheduler; residuals keep the enqueue time of their ancestor."""

    def __init__(self, root: Node, depth: int | None = None, weight: Callable[[RuleApp], int] | None = None):
        self.root = root
        self.depth = depth
        self.weight = weight
        self.stamp: dict[tuple, int] = {}
        self.pred: dict[int, int] = {}
        self.steps = 0
        self.trace = ReductionTrace()
        self.endsequent = view(root).conclusion if not isinstance(root, SNode) else root.conclusion

    def frontier(self) -> list[tuple[tuple, Redex]]:
        out = []
        for path, mn, _ in mcuts(self.root, self.depth, self.weight):
            for key, r in _redex_keys(mn, path):
                if key not in self.stamp:
                    old = self.pred.get(mn.uid)
                    inherited = self.stamp.get((old,) + key[1:]) if old is not None else None
                    if inherited is None and old is not None:
                        inherited = self.stamp.get((old,) + key[1:3] + (0,))
                    self.stamp[key] = inherited if inherited is not None else self.steps
                out.append((key, r))
        return out

    def pending(self) -> bool:
        return bool(mcuts(self.root, self.depth, self.weight))

    def step(self) -> tuple[Redex, Node, Node] | None:
        cands = self.frontier()
        if not cands:
            return None
        key, r = min(cands, key=lambda kr: (self.stamp[kr[0]], kr[1].node, kr[1].premises))
        old = self.root
        new, res, mn = reduce_step(old, r)
        for s in res.successors:
            self.pred[s.uid] = mn.uid
        age = self.steps - self.stamp[key]
        del self.stamp[key]
        self.root = new
        self.trace.entries.append(TraceEntry(self.steps, r, view(new).conclusion, age, len(cands)))
        self.steps += 1
        return r, old, new


def _classical(p: ProofGraph) -> bool:
    return p.system is not None and p.system.classical


def _linear_weight(app: RuleApp) -> int:
    from .translate import _SK_ERASE
    return 0 if app.rule in _SK_ERASE else 1


def fair_reduce(p: ProofGraph, fuel: int, depth: int, check_valid: bool = True,
                observer: Callable[[Redex, Node, Node], None] | None = None,
                measure: str | None = None) -> tuple[TreePrefix, ReductionTrace, str]:
    """Reduce ``p`` fairly until no multicut is left within ``depth`` or ``fuel`` runs out.

    Classical proofs are reduced through their linear translation; the
    returned prefix is then the skeleton of the linear one and ``depth``
    counts skeleton rules.  ``measure="skeleton"`` makes ``depth`` count
    skeleton rules for linear input too (the prefix stays linear and covers
    that many skeleton rules); ``"raw"`` counts every rule.
    """
    from .translate import lin_proof, sk_tree
    from .validity import validity_check

    if check_valid:
        v = validity_check(p)
        if not v.valid:
            raise InvalidInput(f"{p.name} is not valid: {v.report()}")
    classical = _classical(p)
    if measure is None:
        measure = "skeleton" if classical else "raw"
    if measure not in ("skeleton", "raw"):
        raise MucutError(f"unknown depth measure {measure!r}")
    g = lin_proof(p) if classical else p
    weight = _linear_weight if measure == "skeleton" else None
    red = FairReducer(_root_of(init_reduction(g)), depth, weight)
    status = FUEL_OUT
    while True:
        if not red.pending():
            status = CUT_FREE
            break
        if red.steps >= fuel:
            break
        out = red.step()
        if out is None:
            break
        if observer is not None:
            observer(*out)
    if classical:
        prefix = sk_tree(to_prefix(red.root, _weighted_layers(red.root, depth)), depth)
    elif weight is not None:
        prefix = to_prefix(red.root, _weighted_layers(red.root, depth))
    else:
        prefix = to_prefix(red.root, depth)
    red.trace.prefix = prefix
    return prefix, red.trace, status


def _weighted_layers(root: Node, depth: int) -> int:
    """Raw layers needed so that every branch shows ``depth`` skeleton rules (or ends)."""
    best = 0
    stack = [(root, 0, 0)]
    while stack:
        x, raw, d = stack.pop()
        if d >= depth:
            best = max(best, raw)
            continue
        if isinstance(x, SNode) and raw > 4 * depth + 64:
            best = max(best, raw)
            continue
        v = view(x)
        if isinstance(v, MNode):
            best = max(best, raw)
            continue
        best = max(best, raw + 1)
        for c in v.children:
            stack.append((c, raw + 1, d + _linear_weight(v.app)))
    return best
