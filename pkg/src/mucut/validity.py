"""Thread validity of regular pre-proofs.

A thread is tracked together with a guessed minimal formula ``m``: it may
only visit formulas above ``m`` in the subformula ordering, and it passes
an accepting point whenever it sits on ``m`` at a step where ``m`` is
principal, ``m`` being a nu-formula on the right or a mu-formula on the
left.  A branch is valid iff some thread passes accepting points
infinitely often.

Two deciders are provided: inclusion of the branch automaton in the thread
automaton through rank-based complementation (``method="rank"``), and a
Ramsey-style closure of thread graphs between cycle entry points
(``method="ramsey"``).  ``"auto"`` runs the first within a state budget
and falls back to the second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx

from .buchi import BudgetExceeded, included
from .calculus import Pos
from .errors import NotPeriodic
from .formula import Formula, formula_le, minimum
from .proof import ProofGraph, child_map, child_target, enumerate_simple_cycles

Edge = tuple[str, int]  # (node, child index)


@dataclass(frozen=True)
class ThreadStep:
    node: str
    pos: Pos
    formula: Formula
    principal: bool

    @property
    def side(self) -> str:
        return self.pos[0]


@dataclass(frozen=True)
class Thread:
    stem: tuple[ThreadStep, ...]
    loop: tuple[ThreadStep, ...]


@dataclass(frozen=True)
class ValidityVerdict:
    valid: bool
    method: str
    certificate: tuple = ()
    stem: tuple[str, ...] = ()
    loop: tuple[str, ...] = ()
    loop_edges: tuple[Edge, ...] = field(default=(), compare=False)

    def __bool__(self) -> bool:
        return self.valid

    def report(self) -> str:
        if self.valid:
            return f"Valid ({self.method})"
        return f"Invalid ({self.method})\nstem: {' '.join(self.stem)}\nloop: {' '.join(self.loop)}"


def _side_ok(m: Formula, side: str) -> bool:
    return (m.op == "nu" and side == "R") or (m.op == "mu" and side == "L")


def thread_ok(t: Thread, side: str | None = None) -> bool:
    if not t.loop:
        raise NotPeriodic("thread has an empty loop")
    m = minimum(s.formula for s in t.loop)
    if m is None or not m.is_fixpoint():
        return False
    sides = {s.side for s in t.loop if s.formula == m}
    want = {"antecedent": "L", "succedent": "R"}.get(side, side)
    if want is not None and want not in sides:
        return False
    if not any(_side_ok(m, s) for s in sides):
        return False
    return any(s.principal for s in t.loop)


class ThreadSystem:
    """Positions, steps and acceptance of the thread automaton of a proof graph."""

    def __init__(self, p: ProofGraph):
        self.p = p
        self.nodes = p.reachable()
        fixes: set[Formula] = set()
        for n in self.nodes:
            for f in p.conclusion(n).formulas():
                for g in f.subterms:
                    if g.is_fixpoint() and g.is_closed():
                        fixes.add(g)
        self.candidates: list[Formula] = sorted(fixes, key=lambda f: (f.size, str(f)))
        self._allowed: dict[tuple[str, Pos, int], bool] = {}
        self._edge_rel: dict[Edge, frozenset] = {}

    def formula(self, n: str, pos: Pos) -> Formula:
        return self.p.conclusion(n).at(pos)

    def allowed(self, n: str, pos: Pos, m: int) -> bool:
        key = (n, pos, m)
        if key not in self._allowed:
            self._allowed[key] = formula_le(self.candidates[m], self.formula(n, pos))
        return self._allowed[key]

    def accepting(self, n: str, pos: Pos, m: int) -> bool:
        cand = self.candidates[m]
        app = self.p.nodes[n].app
        return self.formula(n, pos) == cand and pos in app.principal and _side_ok(cand, pos[0])

    def edges(self, n: str) -> list[tuple[Edge, str]]:
        return [((n, i), child_target(c)) for i, c in enumerate(self.p.nodes[n].children)]

    def step(self, edge: Edge, pos: Pos) -> list[Pos]:
        n, i = edge
        node = self.p.nodes[n]
        c = node.children[i]
        return [child_map(c, q) for k, q in node.app.ancestors.get(pos, ()) if k == i]

    def edge_relation(self, edge: Edge) -> frozenset:
        """``{(p, q, m, accepting-at-p)}`` for one edge."""
        if edge not in self._edge_rel:
            n, i = edge
            t = child_target(self.p.nodes[n].children[i])
            rel = {}
            for pos in self.p.conclusion(n).positions():
                for m in range(len(self.candidates)):
                    if not self.allowed(n, pos, m):
                        continue
                    acc = self.accepting(n, pos, m)
                    for q in self.step(edge, pos):
                        if self.allowed(t, q, m):
                            k = (pos, q, m)
                            rel[k] = rel.get(k, False) or acc
            self._edge_rel[edge] = _freeze(rel)
        return self._edge_rel[edge]


def _freeze(rel: dict) -> frozenset:
    return frozenset((p, q, m, b) for (p, q, m), b in rel.items())


def compose(g: frozenset, h: frozenset) -> frozenset:
    by_src: dict = {}
    for q, r, m, b in h:
        by_src.setdefault((q, m), []).append((r, b))
    rel: dict = {}
    for p, q, m, b1 in g:
        for r, b2 in by_src.get((q, m), ()):
            k = (p, r, m)
            rel[k] = rel.get(k, False) or b1 or b2
    return _freeze(rel)


def has_accepting_loop(g: frozenset) -> bool:
    return any(p == q and b for p, q, _, b in g)


def idempotent_power(g: frozenset) -> frozenset:
    """``g^k`` for the least ``k`` making it idempotent."""
    powers = [g]
    while True:
        cur = powers[-1]
        if compose(cur, cur) == cur:
            return cur
        nxt = compose(cur, g)
        if nxt in powers:
            # cycle in the power sequence: its idempotent member is the one we want
            for x in powers[powers.index(nxt):]:
                if compose(x, x) == x:
                    return x
        powers.append(nxt)


def loop_relation(ts: ThreadSystem, edges: Iterable[Edge]) -> frozenset:
    edges = list(edges)
    g = ts.edge_relation(edges[0])
    for e in edges[1:]:
        g = compose(g, ts.edge_relation(e))
    return g


def branch_valid(p: ProofGraph, loop_edges: Iterable[Edge], ts: ThreadSystem | None = None) -> bool:
    """Whether the ultimately periodic branch repeating ``loop_edges`` has a valid thread."""
    ts = ts or ThreadSystem(p)
    return has_accepting_loop(idempotent_power(loop_relation(ts, loop_edges)))


def cycle_edges(p: ProofGraph, cycle: list[str]) -> list[Edge]:
    out = []
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        idx = [i for i, c in enumerate(p.nodes[a].children) if child_target(c) == b]
        out.append((a, idx[0]))
    return out


# -- deciders -----------------------------------------------------------------------

def _entry_points(p: ProofGraph) -> set[str]:
    """Targets of depth-first back edges: every cycle passes through one of them."""
    out: set[str] = set()
    state: dict[str, int] = {}
    stack: list[tuple[str, Iterable]] = [(p.root, iter(p.successors(p.root)))]
    state[p.root] = 1
    while stack:
        n, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            state[n] = 2
            stack.pop()
            continue
        s = state.get(nxt, 0)
        if s == 1:
            out.add(nxt)
        elif s == 0:
            state[nxt] = 1
            stack.append((nxt, iter(p.successors(nxt))))
    return out


def _ramsey(p: ProofGraph, ts: ThreadSystem) -> ValidityVerdict:
    entries = _entry_points(p)
    if not entries:
        return ValidityVerdict(True, "ramsey", ("no infinite branch",))
    # base segments between entry points
    base: dict[tuple[str, str, frozenset], tuple[Edge, ...]] = {}
    for t in sorted(entries):
        todo = []
        for edge, nxt in ts.edges(t):
            todo.append((nxt, ts.edge_relation(edge), (edge,)))
        seen = set()
        while todo:
            n, rel, path = todo.pop()
            if n in entries:
                base.setdefault((t, n, rel), path)
                continue
            if (n, rel) in seen:
                continue
            seen.add((n, rel))
            for edge, nxt in ts.edges(n):
                todo.append((nxt, compose(rel, ts.edge_relation(edge)), path + (edge,)))
    closure = dict(base)
    by_start: dict[str, list] = {}
    for (t, u, g), path in base.items():
        by_start.setdefault(t, []).append((u, g, path))
    work = list(closure.items())
    while work:
        (t, u, g), path = work.pop()
        for v, h, path2 in by_start.get(u, ()):
            k = (t, v, compose(g, h))
            if k not in closure:
                closure[k] = path + path2
                work.append((k, closure[k]))
    checked = 0
    for (t, u, g), path in sorted(closure.items(), key=lambda kv: (len(kv[1]), repr(kv[0][:2]))):
        if t != u or compose(g, g) != g:
            continue
        checked += 1
        if not has_accepting_loop(g):
            return _invalid(p, "ramsey", path)
    return ValidityVerdict(True, "ramsey", (f"{checked} idempotent loop graphs accepted",))


def _invalid(p: ProofGraph, method: str, loop_edges: tuple[Edge, ...], stem_edges: tuple[Edge, ...] | None = None) -> ValidityVerdict:
    start = loop_edges[0][0]
    if stem_edges is None:
        path = nx.shortest_path(_digraph(p), p.root, start)
        stem = tuple(path[:-1])
    else:
        stem = tuple(e[0] for e in stem_edges)
    return ValidityVerdict(False, method, (), stem, tuple(e[0] for e in loop_edges), tuple(loop_edges))


def _digraph(p: ProofGraph) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_node(p.root)
    for n in p.reachable():
        for t in p.successors(n):
            g.add_edge(n, t)
    return g


def _rank(p: ProofGraph, ts: ThreadSystem, budget: int) -> ValidityVerdict:
    ncand = len(ts.candidates)
    width = max((len(p.conclusion(n)) for n in ts.nodes), default=0) * max(ncand, 1)
    wait = ("wait",)

    def letters(n):
        return [(edge, t) for edge, t in ts.edges(n)]

    def right_step(state, edge):
        n, i = edge
        t = child_target(p.nodes[n].children[i])
        if state == wait:
            out = [wait]
            for q in p.conclusion(t).positions():
                for m in range(ncand):
                    if ts.allowed(t, q, m):
                        out.append((t, q, m))
            return out
        sn, pos, m = state
        return [(t, q, m) for q in ts.step(edge, pos) if ts.allowed(t, q, m)]

    def right_accepting(state):
        return state != wait and ts.accepting(*state)

    res = included(p.root, letters, [wait], right_step, right_accepting,
                   rank_bound=2 * width + 1, budget=budget, pinned=wait)
    if res.included:
        return ValidityVerdict(True, "rank", (f"no accepting lasso among {res.explored} product states",))
    stem, loop = res.lasso
    return _invalid(p, "rank", loop, stem)


def validity_check(p: ProofGraph, method: str = "auto", budget: int = 2000) -> ValidityVerdict:
    ts = ThreadSystem(p)
    if not _entry_points(p):
        return ValidityVerdict(True, "finite", ("no infinite branch",))
    if method == "ramsey":
        return _ramsey(p, ts)
    try:
        return _rank(p, ts, budget)
    except BudgetExceeded:
        if method == "rank":
            raise
        return _ramsey(p, ts)


def quick_cycle_check(p: ProofGraph) -> str:
    """``"Valid"`` when every cyclic component is one simple cycle carrying a valid thread."""
    g = _digraph(p)
    ts = ThreadSystem(p)
    for comp in nx.strongly_connected_components(g):
        sub = g.subgraph(comp)
        if sub.number_of_edges() == 0:
            continue
        if sub.number_of_edges() != len(comp):
            return "Unknown"
        cyc = enumerate_simple_cycles_in(sub)
        edges = cycle_edges(p, cyc)
        # a doubled child edge inside the cycle would be a second cycle
        for n, _ in edges:
            if sum(1 for t in p.successors(n) if t in comp) > 1:
                return "Unknown"
        if not branch_valid(p, edges, ts):
            return "Unknown"
    return "Valid"


def enumerate_simple_cycles_in(g: nx.DiGraph) -> list[str]:
    cyc = next(iter(nx.simple_cycles(g)))
    k = cyc.index(min(cyc, key=lambda n: (len(n), n)))
    return cyc[k:] + cyc[:k]


def loop_threads(p: ProofGraph, loop_edges: list[Edge]) -> list[Thread]:
    """Periodic threads along the branch repeating ``loop_edges`` (one per cycle of positions)."""
    ts = ThreadSystem(p)
    start = loop_edges[0][0]
    # paths of positions over one traversal of the loop
    paths: dict[tuple[Pos, Pos], list[ThreadStep]] = {}
    for pos in p.conclusion(start).positions():
        frontier = [(pos, [])]
        for n, i in loop_edges:
            nxt = []
            for q, steps in frontier:
                st = ThreadStep(n, q, ts.formula(n, q), q in p.nodes[n].app.principal)
                for q2 in ts.step((n, i), q):
                    nxt.append((q2, steps + [st]))
            frontier = nxt
        for q, steps in frontier:
            paths.setdefault((pos, q), steps)
    g = nx.DiGraph()
    g.add_edges_from(paths)
    out = []
    for cyc in nx.simple_cycles(g):
        steps: list[ThreadStep] = []
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            steps.extend(paths[(a, b)])
        out.append(Thread((), tuple(steps)))
    return out


def threads_of_cycle(p: ProofGraph, cycle: list[str]) -> list[Thread]:
    return loop_threads(p, cycle_edges(p, cycle))


def all_cycles(p: ProofGraph) -> list[list[str]]:
    return enumerate_simple_cycles(p)
