"""The multicut rule: premises, the iota map and the pairing of cut formulas."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .calculus import Params, Pos, RuleApp, Sequent
from .errors import NotACutTree, PositionsNotInOnePremise
from .proof import BackEdge, Defect, ProofGraph, RuleNode, Suspension, TreeNode, TreePrefix, child_target

# a position inside premise ``i``: (i, side, index)
PPos = tuple[int, str, int]


def ppos(i: int, p: Pos) -> PPos:
    return (i, p[0], p[1])


def local(q: PPos) -> Pos:
    return (q[1], q[2])


@dataclass(frozen=True, eq=False)
class Mcut:
    premises: tuple[Sequent, ...]
    conclusion: Sequent
    iota: tuple[tuple[Pos, PPos], ...]
    ppr: frozenset[frozenset[PPos]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "premises", tuple(self.premises))
        object.__setattr__(self, "iota", tuple(sorted(self.iota)))
        object.__setattr__(self, "ppr", frozenset(frozenset(l) for l in self.ppr))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mcut):
            return NotImplemented
        return (self.premises, self.conclusion, self.iota, self.ppr) == \
            (other.premises, other.conclusion, other.iota, other.ppr)

    def __hash__(self) -> int:
        return hash((self.conclusion, len(self.premises)))

    @property
    def arity(self) -> int:
        return len(self.premises)

    @cached_property
    def iota_map(self) -> dict[Pos, PPos]:
        return dict(self.iota)

    @cached_property
    def iota_inverse(self) -> dict[PPos, Pos]:
        return {q: c for c, q in self.iota}

    @cached_property
    def partners(self) -> dict[PPos, PPos]:
        out: dict[PPos, PPos] = {}
        for link in self.ppr:
            if len(link) == 2:
                a, b = sorted(link)
                out[a] = b
                out[b] = a
        return out

    def partner(self, q: PPos) -> PPos | None:
        return self.partners.get(q)

    def formula(self, q: PPos):
        return self.premises[q[0]].at(local(q))

    def links_of(self, i: int) -> list[tuple[PPos, PPos]]:
        return sorted((q, r) for q, r in self.partners.items() if q[0] == i)

    def to_text(self) -> str:
        io = " ".join(f"{c[0]}{c[1]}={q[0]}:{q[1]}{q[2]}" for c, q in self.iota)
        pr = " ".join(f"{a[0]}:{a[1]}{a[2]}~{b[0]}:{b[1]}{b[2]}" for a, b in sorted(tuple(sorted(l)) for l in self.ppr))
        return f"iota {io} ppr {pr}".rstrip()

    def __repr__(self) -> str:
        return f"Mcut({len(self.premises)} premises, {self.conclusion})"


def mcut_app(m: Mcut) -> RuleApp:
    anc = {c: ((q[0], local(q)),) for c, q in m.iota}
    for c in m.conclusion.positions():
        anc.setdefault(c, ())
    return RuleApp("mcut", m.conclusion, m.premises, anc, (), Params(mcut=m))


def mcut_wellformed(m: Mcut | None) -> list[Defect]:
    if m is None:
        return [Defect(None, "McutMissing", "no multicut data")]
    out: list[Defect] = []

    def bad(kind: str, reason: str) -> None:
        out.append(Defect(None, kind, reason))

    def valid(q: PPos) -> bool:
        return 0 <= q[0] < len(m.premises) and m.premises[q[0]].has(local(q))

    image: dict[PPos, Pos] = {}
    seen_c = set()
    for c, q in m.iota:
        if c in seen_c:
            bad("IotaNotFunctional", f"{c} mapped twice")
        seen_c.add(c)
        if not m.conclusion.has(c):
            bad("IotaUnknown", f"{c} is not a conclusion position")
            continue
        if not valid(q):
            bad("IotaUnknown", f"{q} is not a premise position")
            continue
        if q in image:
            bad("IotaNotInjective", f"{q} is the image of {image[q]} and {c}")
        image[q] = c
        if c[0] != q[1]:
            bad("IotaSideMismatch", f"{c} and {q} lie on different sides")
        elif m.conclusion.at(c) != m.formula(q):
            bad("IotaFormulaMismatch", f"{c} and {q} carry different formulas")
    for c in m.conclusion.positions():
        if c not in seen_c:
            bad("IotaNotTotal", f"conclusion position {c} is not mapped")
    linked: dict[PPos, int] = {}
    for link in m.ppr:
        pair = sorted(link)
        if len(pair) != 2:
            bad("PprMalformed", f"link {pair} does not relate two positions")
            continue
        a, b = pair
        if not (valid(a) and valid(b)):
            bad("PprUnknown", f"link {a}~{b} mentions a missing position")
            continue
        for q in (a, b):
            linked[q] = linked.get(q, 0) + 1
            if q in image:
                bad("PprOverlap", f"{q} is both linked and in the image of iota")
        if a[1] == b[1]:
            bad("PprSameSide", f"{a} and {b} lie on the same side")
        if m.formula(a) != m.formula(b):
            bad("PprFormulaMismatch", f"{a} and {b} carry different formulas")
    for q, n in linked.items():
        if n > 1:
            bad("PprNotFunctional", f"{q} is linked {n} times")
    for i, s in enumerate(m.premises):
        for p in s.positions():
            q = ppos(i, p)
            if q not in image and q not in linked:
                bad("PprNotTotal", f"{q} is neither linked nor in the image of iota")
    # acyclic and connected projection on premises
    parent = list(range(len(m.premises)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for link in m.ppr:
        pair = sorted(link)
        if len(pair) != 2 or not all(0 <= q[0] < len(m.premises) for q in pair):
            continue
        x, y = find(pair[0][0]), find(pair[1][0])
        if x == y:
            bad("PprCyclic", f"link {pair[0]}~{pair[1]} closes a cycle between premises")
        else:
            parent[x] = y
    if len({find(i) for i in range(len(m.premises))}) > 1:
        bad("PprDisconnected", "premises are not connected by links")
    return out


def restrict(m: Mcut, occs: Iterable[PPos], exclude_self: bool = True) -> set[int]:
    occs = set(occs)
    if not occs:
        return set()
    idx = {q[0] for q in occs}
    if len(idx) != 1:
        raise PositionsNotInOnePremise(f"positions {sorted(occs)} span premises {sorted(idx)}")
    (i,) = idx
    included = {i}
    todo = []
    for q in occs:
        r = m.partner(q)
        if r is not None and r[0] not in included:
            included.add(r[0])
            todo.append(r[0])
    while todo:
        k = todo.pop()
        for _, r in m.links_of(k):
            if r[0] not in included:
                included.add(r[0])
                todo.append(r[0])
    if exclude_self:
        included.discard(i)
    return included


def identity_mcut(s: Sequent) -> Mcut:
    return Mcut((s,), s, tuple((p, ppos(0, p)) for p in s.positions()), frozenset())


def cut_to_mcut(app: RuleApp) -> Mcut:
    if app.rule != "cut":
        raise NotACutTree(f"{app.rule} is not a cut")
    iota = []
    for c, targets in app.ancestors.items():
        (k, p), = targets
        iota.append((c, ppos(k, p)))
    p0, p1 = app.premises
    link = frozenset({(0, "R", 0), (1, "L", len(p1.ante) - 1)})
    return Mcut(app.premises, app.conclusion, tuple(iota), frozenset({link}))


def flatten_cut_tree(t: TreePrefix) -> tuple[Mcut, list[TreePrefix]]:
    """Flatten the maximal tree of cuts at the root of ``t``."""
    if not isinstance(t, (TreeNode, Suspension)):
        raise NotACutTree(f"not a proof tree: {t!r}")
    if isinstance(t, Suspension) or t.app.rule != "cut":
        return identity_mcut(t.conclusion), [t]
    leaves: list[TreePrefix] = []
    subs = []
    for child in t.children:
        m, ls = flatten_cut_tree(child)
        subs.append((m, len(leaves)))
        leaves.extend(ls)

    def lift(k: int, p: Pos) -> PPos:
        m, off = subs[k]
        q = m.iota_map[p]
        return (q[0] + off, q[1], q[2])

    iota = []
    for c, targets in t.app.ancestors.items():
        (k, p), = targets
        iota.append((c, lift(k, p)))
    links = set()
    for m, off in subs:
        for l in m.ppr:
            links.add(frozenset((q[0] + off, q[1], q[2]) for q in l))
    p1 = t.app.premises[1]
    links.add(frozenset({lift(0, ("R", 0)), lift(1, ("L", len(p1.ante) - 1))}))
    prem = tuple(l.conclusion for l in leaves)
    return Mcut(prem, t.conclusion, tuple(iota), frozenset(links)), leaves


def from_cut_tree(t: TreePrefix) -> Mcut:
    return flatten_cut_tree(t)[0]


def init_reduction(p: ProofGraph) -> ProofGraph:
    """Turn the bottom-most cut of every branch into a binary multicut.

    Nodes below the first cut are kept once ("no cut yet"); everything
    above a cut is a second copy of the original graph in which cuts stay
    ordinary rules.
    """
    if not (p.rules() & {"cut", "mcut"}):
        return p
    region_a: list[str] = []
    seen = set()
    stack = [p.root]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        region_a.append(n)
        if p.nodes[n].app.rule not in ("cut", "mcut"):
            stack.extend(p.successors(n))
    nodes: dict[str, RuleNode] = {}
    need_b: set[str] = set()

    def b_id(n: str) -> str:
        need_b.add(n)
        return "b." + n

    for n in region_a:
        node = p.nodes[n]
        app = node.app
        if app.rule in ("cut", "mcut"):
            app2 = mcut_app(cut_to_mcut(app)) if app.rule == "cut" else app
            kids = tuple(BackEdge(b_id(c.target), c.align) if isinstance(c, BackEdge) else b_id(c)
                         for c in node.children)
            nodes[n] = RuleNode(app2, kids)
        else:
            nodes[n] = RuleNode(app, node.children)
    todo = list(need_b)
    done = set()
    while todo:
        n = todo.pop()
        if n in done:
            continue
        done.add(n)
        node = p.nodes[n]
        kids = []
        for c in node.children:
            t = child_target(c)
            if t not in done:
                todo.append(t)
            kids.append(BackEdge("b." + t, c.align) if isinstance(c, BackEdge) else "b." + t)
        nodes["b." + n] = RuleNode(node.app, tuple(kids))
    return ProofGraph(nodes, p.root, p.system, p.name, p.abbrevs).canonical()
