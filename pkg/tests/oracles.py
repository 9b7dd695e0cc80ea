"""Independent oracles used by the tests.

None of these reuse the library's deciders: validity is checked on
explicit lasso branches, numerals are built from bare rule instances, and
the formula maps are re-derived from their defining clauses.
"""

from __future__ import annotations

import itertools
import os

import networkx as nx

from mucut.calculus import Sequent, instantiate
from mucut.formula import Formula, substitute
from mucut.proof import BackEdge, Suspension, TreeNode

SEED = int(os.environ.get("MUCUT_SEED", "0"))


# -- formulas ---------------------------------------------------------------------------

def subterms(f: Formula) -> list[Formula]:
    out = [f]
    for a in f.args:
        out.extend(subterms(a))
    return out


def le(a: Formula, b: Formula) -> bool:
    return any(a == s for s in subterms(b))


def naive_closure(f: Formula) -> set[Formula]:
    """Fixed point of: subformulas, and unfoldings of binders."""
    out = {f}
    while True:
        new = set(out)
        for g in out:
            if g.op in ("mu", "nu"):
                new.add(substitute(g.args[0], g.name, g))
            else:
                new.update(g.args)
        if new == out:
            return out
        out = new


_SK = {"tensor": "and", "with": "and", "par": "or", "plus": "or", "limpl": "impl",
       "one": "true", "top": "true", "bot": "false", "zero": "false"}


def sk_oracle(f: Formula) -> Formula:
    if f.op in ("bang", "quest"):
        return sk_oracle(f.args[0])
    return Formula(_SK.get(f.op, f.op), tuple(sk_oracle(a) for a in f.args), f.name)


# -- numerals ---------------------------------------------------------------------------

def numeral_tree(n: int, nat: Formula) -> TreeNode:
    """The finite tree ``mu_r; or_r2`` (n times), ``mu_r; or_r1; true_r``."""
    def build(seq: Sequent, rules: list[str]) -> TreeNode:
        app = instantiate(rules[0], seq, ("R", 0))
        if not app.premises:
            return TreeNode(app, ())
        return TreeNode(app, (build(app.premises[0], rules[1:]),))
    rules = ["mu_r", "or_r2"] * n + ["mu_r", "or_r1", "true_r"]
    return build(Sequent((), (nat,)), rules)


def cut(t: TreeNode | Suspension, depth: int):
    if isinstance(t, Suspension) or depth <= 0:
        return Suspension(t.conclusion, None)
    return TreeNode(t.app, tuple(cut(c, depth - 1) for c in t.children))


def strip_refs(t):
    if isinstance(t, Suspension):
        return Suspension(t.sequent, None)
    return TreeNode(t.app, tuple(strip_refs(c) for c in t.children))


# -- validity on lassos -----------------------------------------------------------------------

def _edges(p):
    for n in p.reachable():
        for i, c in enumerate(p.nodes[n].children):
            t = c.target if isinstance(c, BackEdge) else c
            yield n, i, t


def closed_walks(p, max_len: int):
    """Closed walks (as edge lists) of length <= max_len, each rotation listed once."""
    succ: dict[str, list] = {}
    for n, i, t in _edges(p):
        succ.setdefault(n, []).append((i, t))
    out = []
    for start in sorted(succ):
        stack = [(start, [])]
        while stack:
            n, path = stack.pop()
            if len(path) >= max_len:
                continue
            for i, t in succ.get(n, ()):
                e = (n, i)
                walk = path + [e]
                if t == start:
                    if min(walk) == walk[0]:
                        out.append(walk)
                else:
                    stack.append((t, walk))
    return out


def branch_has_valid_thread(p, walk) -> bool:
    """Does the branch repeating ``walk`` forever carry a valid thread?

    Threads live in the product of positions and walk offsets; a valid one
    exists iff some simple cycle there has a least formula that is a nu on
    the right or a mu on the left and is principal somewhere on the cycle.
    """
    g = nx.DiGraph()
    L = len(walk)
    info = {}
    for k, (n, i) in enumerate(walk):
        node = p.nodes[n]
        app = node.app
        c = node.children[i]
        for pos in app.conclusion.positions():
            info[(k, pos)] = (app.conclusion.at(pos), pos in app.principal, pos[0])
            for (kk, q) in app.ancestors.get(pos, ()):
                if kk != i:
                    continue
                if isinstance(c, BackEdge):
                    q = c.map_pos(q)
                g.add_edge((k, pos), ((k + 1) % L, q))
    for cyc in nx.simple_cycles(g):
        fs = [info[v][0] for v in cyc]
        m = [f for f in fs if all(le(f, h) for h in fs)]
        if not m:
            continue
        m = m[0]
        ok = any(info[v][0] == m and ((m.op == "nu" and info[v][2] == "R") or (m.op == "mu" and info[v][2] == "L"))
                 for v in cyc)
        principal = any(info[v][0] == m and info[v][1] for v in cyc)
        if ok and principal:
            return True
    return False


def lasso_counterexample(p, max_len: int = 8):
    """A closed walk whose branch has no valid thread, or None."""
    for walk in closed_walks(p, max_len):
        if not branch_has_valid_thread(p, walk):
            return walk
    return None


def loop_from_witness(p, loop_nodes) -> list:
    """Edges of the cycle listed by a validity witness."""
    nodes = list(loop_nodes)
    out = []
    for a, b in zip(nodes, nodes[1:] + nodes[:1]):
        kids = [i for i, c in enumerate(p.nodes[a].children)
                if (c.target if isinstance(c, BackEdge) else c) == b]
        out.append((a, kids[0]))
    return out


def permutations_of(xs):
    return list(itertools.permutations(xs))
