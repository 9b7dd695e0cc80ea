"""Büchi inclusion by on-the-fly rank-based complementation.

The left automaton is deterministic and accepts every infinite run (it is
the branch automaton of a proof graph); the right automaton is given by a
successor function and an acceptance predicate.  ``included`` explores the
product of the left automaton with the Kupferman-Vardi complement of the
right one and looks for an accepting lasso.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Hashable, Iterable

import networkx as nx


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class InclusionResult:
    included: bool
    explored: int
    lasso: tuple[tuple, tuple] | None = None  # (stem letters, loop letters)


def included(
    start: Hashable,
    letters: Callable[[Hashable], Iterable[tuple[Hashable, Hashable]]],
    initial_right: Iterable[Hashable],
    right_step: Callable[[Hashable, Hashable], Iterable[Hashable]],
    right_accepting: Callable[[Hashable], bool],
    rank_bound: int,
    budget: int = 20000,
    pinned: Hashable | None = None,
) -> InclusionResult:
    """Decide whether every run of the left automaton is accepted by the right one.

    ``letters(q)`` lists ``(letter, q')`` pairs of the left automaton.
    ``pinned`` names a right state whose rank is fixed to the top odd value,
    a sound shortcut for a non-accepting state that only loops to itself.
    """
    top = rank_bound if rank_bound % 2 == 1 else rank_bound - 1

    def init_rank(q):
        return top if q == pinned else (rank_bound if not right_accepting(q) or rank_bound % 2 == 0 else rank_bound - 1)

    init_f = tuple(sorted(((q, init_rank(q)) for q in set(initial_right)), key=repr))
    init = (start, init_f, ())
    graph = nx.DiGraph()
    graph.add_node(init)
    todo = [init]
    seen = {init}
    edges = 0
    while todo:
        state = todo.pop()
        q, f, o = state
        franks = dict(f)
        for letter, q2 in letters(q):
            bound: dict[Hashable, int] = {}
            for s, r in franks.items():
                for s2 in right_step(s, letter):
                    bound[s2] = min(bound.get(s2, r), r)
            order = sorted(bound, key=repr)
            choices = []
            for s2 in order:
                if s2 == pinned:
                    choices.append((top,))
                    continue
                b = bound[s2]
                rs = [r for r in range(b + 1) if not (right_accepting(s2) and r % 2 == 1)]
                choices.append(tuple(reversed(rs)))
            fanout = 1
            for c in choices:
                fanout *= len(c)
            edges += fanout
            if fanout > budget or edges > 2 * budget:
                raise BudgetExceeded(len(seen))
            osucc = set()
            for s in o:
                osucc.update(right_step(s, letter))
            for ranks in product(*choices):
                f2 = tuple(zip(order, ranks))
                even = {s for s, r in f2 if r % 2 == 0}
                o2 = (osucc & even) if o else even
                nxt = (q2, f2, tuple(sorted(o2, key=repr)))
                graph.add_edge(state, nxt, letter=letter)
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
                    if len(seen) > budget:
                        raise BudgetExceeded(len(seen))
    for comp in nx.strongly_connected_components(graph):
        acc = [s for s in comp if not s[2]]
        if not acc:
            continue
        sub = graph.subgraph(comp)
        a = acc[0]
        if sub.number_of_edges() == 0:
            continue
        # a cycle through ``a`` inside the component
        cyc = None
        for succ in sub.successors(a):
            try:
                back = nx.shortest_path(sub, succ, a)
            except nx.NetworkXNoPath:
                continue
            cyc = [a] + back
            break
        if cyc is None:
            continue
        stem = nx.shortest_path(graph, init, a)
        stem_letters = tuple(graph.edges[u, v]["letter"] for u, v in zip(stem, stem[1:]))
        loop_letters = tuple(graph.edges[u, v]["letter"] for u, v in zip(cyc, cyc[1:]))
        return InclusionResult(False, len(seen), (stem_letters, loop_letters))
    return InclusionResult(True, len(seen))
