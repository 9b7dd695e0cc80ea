"""Regular pre-proofs as finite graphs with back-edges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import networkx as nx

from .calculus import Pos, RuleApp, Sequent, instantiate, rule_in_system
from .errors import MucutError, ShapeMismatch
from .formula import Formula, SystemId, closure_of

Align = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class BackEdge:
    """Edge to an already existing node.

    ``align`` sends premise position ``(s, k)`` to target position
    ``(s, align[s][k])``; ``None`` means the identity.
    """

    target: str
    align: Align | None = None

    def map_pos(self, p: Pos) -> Pos:
        if self.align is None:
            return p
        s, k = p
        return (s, (self.align[0] if s == "L" else self.align[1])[k])


Child = Union[str, BackEdge]


@dataclass(frozen=True)
class RuleNode:
    app: RuleApp
    children: tuple[Child, ...]


@dataclass(frozen=True)
class Defect:
    node: str | None
    kind: str
    reason: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.node or '-'}: {self.reason}"


def child_target(c: Child) -> str:
    return c.target if isinstance(c, BackEdge) else c


def child_map(c: Child, p: Pos) -> Pos:
    return c.map_pos(p) if isinstance(c, BackEdge) else p


def aligned(seq: Sequent, align: Align | None) -> Sequent:
    """The sequent a back-edge with ``align`` expects its target to conclude."""
    if align is None:
        return seq
    ante = [None] * len(seq.ante)
    succ = [None] * len(seq.succ)
    for k, j in enumerate(align[0]):
        ante[j] = seq.ante[k]
    for k, j in enumerate(align[1]):
        succ[j] = seq.succ[k]
    return Sequent(tuple(ante), tuple(succ))


class ProofGraph:
    def __init__(self, nodes: dict[str, RuleNode], root: str, system: SystemId | None = None,
                 name: str = "proof", abbrevs: dict[str, Formula] | None = None):
        self.nodes = dict(nodes)
        self.root = root
        self.system = system
        self.name = name
        self.abbrevs = dict(abbrevs or {})

    def __getitem__(self, nid: str) -> RuleNode:
        return self.nodes[nid]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def endsequent(self) -> Sequent:
        return self.nodes[self.root].app.conclusion

    def conclusion(self, nid: str) -> Sequent:
        return self.nodes[nid].app.conclusion

    def successors(self, nid: str) -> list[str]:
        return [child_target(c) for c in self.nodes[nid].children]

    def reachable(self) -> list[str]:
        seen: list[str] = []
        mark = set()
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n in mark or n not in self.nodes:
                continue
            mark.add(n)
            seen.append(n)
            stack.extend(reversed(self.successors(n)))
        return seen

    def iter_apps(self) -> Iterator[RuleApp]:
        for n in self.nodes.values():
            yield n.app

    def rules(self) -> set[str]:
        return {a.rule for a in self.iter_apps()}

    def is_cut_free(self) -> bool:
        return not (self.rules() & {"cut", "mcut"})

    def canonical(self) -> "ProofGraph":
        """Renumber nodes ``n0, n1, ...`` in depth-first preorder; drop unreachable ones.

        A node first met through a :class:`BackEdge` keeps that edge; the
        first plain child edge to a node becomes its tree edge.
        """
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
                kids = [c for c in self.nodes[m].children if not isinstance(c, BackEdge)]
                stack.extend(reversed(kids))

        visit(self.root)
        # nodes only reachable through back-edges
        i = 0
        while i < len(order):
            for c in self.nodes[order[i]].children:
                t = child_target(c)
                if t not in seen:
                    visit(t)
            i += 1
        ren = {old: f"n{k}" for k, old in enumerate(order)}
        tree_parent: dict[str, tuple[str, int]] = {}
        for old in order:
            for i, c in enumerate(self.nodes[old].children):
                if not isinstance(c, BackEdge) and c not in tree_parent:
                    tree_parent[c] = (old, i)
        nodes = {}
        for old in order:
            kids = []
            for i, c in enumerate(self.nodes[old].children):
                t = child_target(c)
                if isinstance(c, BackEdge):
                    kids.append(BackEdge(ren[t], c.align))
                elif tree_parent.get(c) == (old, i):
                    kids.append(ren[t])
                else:
                    kids.append(BackEdge(ren[t]))
            nodes[ren[old]] = RuleNode(self.nodes[old].app, tuple(kids))
        return ProofGraph(nodes, ren[self.root], self.system, self.name, self.abbrevs)

    def with_system(self, system: SystemId | None) -> "ProofGraph":
        return ProofGraph(self.nodes, self.root, system, self.name, self.abbrevs)

    def __repr__(self) -> str:
        return f"ProofGraph({self.name!r}, {len(self.nodes)} nodes, {self.endsequent})"


# -- building -------------------------------------------------------------------

class GraphBuilder:
    """Grow a proof graph bottom-up from open goals ("holes")."""

    def __init__(self, system: SystemId | None = None, name: str = "proof",
                 abbrevs: dict[str, Formula] | None = None):
        self.system = system
        self.name = name
        self.abbrevs = abbrevs or {}
        self._apps: dict[str, RuleApp] = {}
        self._kids: dict[str, list[Child]] = {}
        self._holes: dict[str, tuple[Sequent, str | None, int]] = {}
        self._n = 0
        self.root: str | None = None

    def _fresh(self) -> str:
        nid = f"n{self._n}"
        self._n += 1
        return nid

    def start(self, seq: Sequent) -> str:
        h = self._fresh()
        self._holes[h] = (seq, None, 0)
        self.root = h
        return h

    def sequent(self, hole: str) -> Sequent:
        return self._holes[hole][0]

    def apply(self, hole: str, rule: str, principal: Pos | None = None, **kw) -> tuple[str, ...]:
        seq = self._holes[hole][0]
        app = instantiate(rule, seq, principal, **kw)
        return self.apply_app(hole, app)

    def apply_app(self, hole: str, app: RuleApp) -> tuple[str, ...]:
        seq, _, _ = self._holes.pop(hole)
        if app.conclusion != seq:
            raise ShapeMismatch(f"rule concludes {app.conclusion}, goal is {seq}")
        self._apps[hole] = app
        kids = []
        for i, prem in enumerate(app.premises):
            h = self._fresh()
            self._holes[h] = (prem, hole, i)
            kids.append(h)
        self._kids[hole] = list(kids)
        return tuple(kids)

    def chain(self, hole: str, steps: list[tuple]) -> str:
        """Apply unary rules in sequence; each step is ``(rule, principal, **kw)``-like tuple."""
        for step in steps:
            rule, principal = step[0], step[1] if len(step) > 1 else None
            kw = step[2] if len(step) > 2 else {}
            (hole,) = self.apply(hole, rule, principal, **kw)
        return hole

    def back(self, hole: str, target: str, align: Align | None = None) -> None:
        seq, parent, i = self._holes.pop(hole)
        if parent is None:
            raise MucutError("cannot close the root goal with a back-edge")
        self._kids[parent][i] = BackEdge(target, align)

    def link(self, hole: str, target: str) -> None:
        """Close ``hole`` with a plain (shared) edge to an existing node."""
        seq, parent, i = self._holes.pop(hole)
        self._kids[parent][i] = target

    def open_holes(self) -> list[str]:
        return list(self._holes)

    def build(self, canonical: bool = True) -> ProofGraph:
        if self._holes:
            raise MucutError(f"open goals remain: {sorted(self._holes)}")
        nodes = {n: RuleNode(self._apps[n], tuple(self._kids[n])) for n in self._apps}
        g = ProofGraph(nodes, self.root, self.system, self.name, self.abbrevs)
        return g.canonical() if canonical else g


# -- finite prefixes --------------------------------------------------------------

@dataclass(frozen=True)
class Suspension:
    sequent: Sequent
    ref: str | None = None

    @property
    def conclusion(self) -> Sequent:
        return self.sequent


@dataclass(frozen=True)
class TreeNode:
    app: RuleApp
    children: tuple["TreePrefix", ...]

    @property
    def conclusion(self) -> Sequent:
        return self.app.conclusion


TreePrefix = Union[TreeNode, Suspension]


def alignment_exchange(premise: Sequent, edge: BackEdge) -> RuleApp:
    """An ``ex`` instance from ``premise`` up to the back-edge target's conclusion."""
    inv_l = [0] * len(edge.align[0])
    inv_r = [0] * len(edge.align[1])
    for k, j in enumerate(edge.align[0]):
        inv_l[j] = k
    for k, j in enumerate(edge.align[1]):
        inv_r[j] = k
    return instantiate("ex", premise, perm=(tuple(inv_l), tuple(inv_r)))


def unfold(p: ProofGraph, depth: int, start: str | None = None) -> TreePrefix:
    """Depth-``depth`` unfolding: ``depth`` rule layers, then suspensions."""

    def go(nid: str, d: int) -> TreePrefix:
        node = p.nodes[nid]
        if d <= 0:
            return Suspension(node.app.conclusion, nid)
        kids = []
        for prem, c in zip(node.app.premises, node.children):
            if isinstance(c, BackEdge) and c.align is not None:
                ex = alignment_exchange(prem, c)
                kids.append(TreeNode(ex, (go(c.target, d - 2),)) if d > 1 else Suspension(prem, None))
            else:
                kids.append(go(child_target(c), d - 1))
        return TreeNode(node.app, tuple(kids))

    return go(start or p.root, depth)


def prefix_depth(t: TreePrefix) -> int:
    if isinstance(t, Suspension):
        return 0
    return 1 + max((prefix_depth(c) for c in t.children), default=0)


def prefix_suspensions(t: TreePrefix) -> list[Suspension]:
    if isinstance(t, Suspension):
        return [t]
    return [s for c in t.children for s in prefix_suspensions(c)]


def prefix_rules(t: TreePrefix) -> list[str]:
    """Rule names in preorder."""
    if isinstance(t, Suspension):
        return []
    out = [t.app.rule]
    for c in t.children:
        out.extend(prefix_rules(c))
    return out


def truncate(t: TreePrefix, depth: int) -> TreePrefix:
    if isinstance(t, Suspension):
        return t
    if depth <= 0:
        return Suspension(t.conclusion, None)
    return TreeNode(t.app, tuple(truncate(c, depth - 1) for c in t.children))


def tree_to_graph(t: TreeNode, system: SystemId | None = None, name: str = "proof") -> ProofGraph:
    """Turn a finite, suspension-free tree into a proof graph."""
    gb = GraphBuilder(system, name)

    def go(node: TreePrefix, hole: str) -> None:
        if isinstance(node, Suspension):
            raise MucutError("cannot store a tree with suspensions as a proof graph")
        holes = gb.apply_app(hole, node.app)
        for c, h in zip(node.children, holes):
            go(c, h)

    go(t, gb.start(t.conclusion))
    return gb.build()


# -- checking ---------------------------------------------------------------------

def _recheck(app: RuleApp) -> RuleApp:
    pr = app.params
    return instantiate(app.rule, app.conclusion, pr.principal, split=pr.split, formula=pr.formula,
                       perm=pr.perm, index=pr.index)


def check_proofgraph(p: ProofGraph) -> list[Defect]:
    from .multicut import mcut_wellformed

    out: list[Defect] = []
    if p.root not in p.nodes:
        return [Defect(p.root, "UnknownNode", "root is not a node")]
    for nid, node in p.nodes.items():
        app = node.app
        if app.rule == "mcut":
            m = app.params.mcut
            for d in mcut_wellformed(m):
                out.append(Defect(nid, "McutDefect", str(d)))
            if m is None or tuple(m.premises) != app.premises or m.conclusion != app.conclusion:
                out.append(Defect(nid, "ShapeError", "mcut node disagrees with its multicut data"))
        else:
            try:
                again = _recheck(app)
                if again.premises != app.premises or dict(again.ancestors) != dict(app.ancestors):
                    out.append(Defect(nid, "ShapeError", f"{app.rule} premises do not follow from the conclusion"))
            except MucutError as e:
                out.append(Defect(nid, "ShapeError", str(e)))
        if p.system is not None and not rule_in_system(app.rule, p.system) and app.rule != "mcut":
            out.append(Defect(nid, "SystemError", f"{app.rule} is not a rule of {p.system.value}"))
        if len(node.children) != len(app.premises):
            out.append(Defect(nid, "ArityError",
                              f"{app.rule} has {len(app.premises)} premises but {len(node.children)} children"))
            continue
        for i, (prem, c) in enumerate(zip(app.premises, node.children)):
            t = child_target(c)
            if t not in p.nodes:
                out.append(Defect(nid, "UnknownNode", f"child {i} points to missing node {t}"))
                continue
            align = c.align if isinstance(c, BackEdge) else None
            if align is not None and (sorted(align[0]) != list(range(len(prem.ante)))
                                      or sorted(align[1]) != list(range(len(prem.succ)))):
                out.append(Defect(nid, "BackEdgeMismatch", f"alignment of child {i} is not a permutation"))
                continue
            if aligned(prem, align) != p.nodes[t].app.conclusion:
                kind = "BackEdgeMismatch" if isinstance(c, BackEdge) else "PremiseMismatch"
                out.append(Defect(nid, kind, f"premise {i} is {prem} but {t} concludes {p.nodes[t].app.conclusion}"))
    reach = set(p.reachable())
    for nid in p.nodes:
        if nid not in reach:
            out.append(Defect(nid, "Unreachable", "node not reachable from the root"))
    if not out and p.is_cut_free():
        cl = closure_of(p.endsequent.formulas())
        for nid in reach:
            for f in p.nodes[nid].app.conclusion.formulas():
                if f not in cl:
                    out.append(Defect(nid, "ClosureViolation", f"{f} is outside the closure of the endsequent"))
                    break
    return out


def graph_digraph(p: ProofGraph) -> nx.DiGraph:
    g = nx.DiGraph()
    for nid in p.reachable():
        g.add_node(nid)
        for t in p.successors(nid):
            g.add_edge(nid, t)
    return g


def enumerate_simple_cycles(p: ProofGraph) -> list[list[str]]:
    def key(n: str):
        return (len(n), n)

    cycles = []
    for cyc in nx.simple_cycles(graph_digraph(p)):
        k = cyc.index(min(cyc, key=key))
        cycles.append(cyc[k:] + cyc[:k])
    cycles.sort(key=lambda c: [key(n) for n in c])
    return cycles


def proof_equal(a: ProofGraph, b: ProofGraph) -> bool:
    """Structural equality up to node naming (and the choice of tree edges)."""
    corr: dict[str, str] = {}
    stack = [(a.root, b.root)]
    while stack:
        x, y = stack.pop()
        if x in corr:
            if corr[x] != y:
                return False
            continue
        if y in corr.values():
            return False
        corr[x] = y
        na, nb = a.nodes[x], b.nodes[y]
        if na.app != nb.app or len(na.children) != len(nb.children):
            return False
        for ca, cb in zip(na.children, nb.children):
            al_a = ca.align if isinstance(ca, BackEdge) else None
            al_b = cb.align if isinstance(cb, BackEdge) else None
            if al_a != al_b:
                return False
            stack.append((child_target(ca), child_target(cb)))
    return True
