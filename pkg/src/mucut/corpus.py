"""Example proofs: the circular examples, numerals and the doubling function."""

from __future__ import annotations

from .calculus import Sequent
from .formula import Atom, ClTrue, Formula, Mu, Nu, Or, SystemId, Var, Diamond
from .proof import GraphBuilder, ProofGraph

NAT = Mu("X", Or(ClTrue, Var("X")))
CONAT = Nu("X", Or(ClTrue, Var("X")))
F_DIA = Nu("X", Diamond(Var("X")))
NU_X = Nu("X", Var("X"))

R0 = ("R", 0)
L0 = ("L", 0)


def example_circular() -> ProofGraph:
    """``F |- F`` for ``F = nu X. dia X``: a cut between two identical loops."""
    gb = GraphBuilder(SystemId.MuLKBox, "example_circular", {"Phi": F_DIA})
    root = gb.start(Sequent((F_DIA,), (F_DIA,)))
    left, right = gb.apply(root, "cut", formula=F_DIA, split=(0, 1))
    for h in (left, right):
        top = gb.chain(h, [("nu_l", L0), ("nu_r", R0), ("dia_p", L0)])
        gb.back(top, h)
    return gb.build()


def inconsistent_loop(gamma: Formula = Atom("a"), delta: Formula = Atom("b")) -> ProofGraph:
    """``gamma |- delta`` by cutting two loops on ``nu X. X``; not valid."""
    gb = GraphBuilder(SystemId.MuLK, "inconsistent_loop")
    root = gb.start(Sequent((gamma,), (delta,)))
    left, right = gb.apply(root, "cut", formula=NU_X, split=(0, 1))
    (top,) = gb.apply(left, "nu_r", ("R", 0))
    gb.back(top, left)
    (top,) = gb.apply(right, "nu_l", ("L", 0))
    gb.back(top, right)
    return gb.build()


def _grow_numeral(gb: GraphBuilder, hole: str, n: int) -> None:
    for _ in range(n):
        hole = gb.chain(hole, [("mu_r", R0), ("or_r2", R0)])
    hole = gb.chain(hole, [("mu_r", R0), ("or_r1", R0)])
    gb.apply(hole, "true_r", R0)


def numeral(n: int) -> ProofGraph:
    """The finite proof of ``|- Nat`` representing ``n``."""
    gb = GraphBuilder(SystemId.MuLK, f"numeral_{n}", {"Nat": NAT})
    _grow_numeral(gb, gb.start(Sequent((), (NAT,))), n)
    return gb.build()


def numeral_value(p: ProofGraph) -> int | None:
    """Oracle: read back the integer denoted by a numeral-shaped proof."""
    n, nid = 0, p.root
    while True:
        node = p.nodes[nid]
        if node.app.rule != "mu_r":
            return None
        nxt = p.nodes[node.children[0] if isinstance(node.children[0], str) else node.children[0].target]
        if nxt.app.rule == "or_r1":
            leaf = nxt.children[0]
            leaf = leaf if isinstance(leaf, str) else leaf.target
            return n if p.nodes[leaf].app.rule == "true_r" else None
        if nxt.app.rule != "or_r2":
            return None
        n += 1
        c = nxt.children[0]
        if not isinstance(c, str):
            return None
        nid = c


def omega_numeral(fixpoint: str = "mu") -> ProofGraph:
    """``|- Nat`` (or ``|- coNat``) by an infinite chain of successors."""
    f = NAT if fixpoint == "mu" else CONAT
    rule = "mu_r" if fixpoint == "mu" else "nu_r"
    name = "pi_inf" if fixpoint == "mu" else "conat_inf"
    gb = GraphBuilder(SystemId.MuLK, name, {"Nat" if fixpoint == "mu" else "CoNat": f})
    root = gb.start(Sequent((), (f,)))
    top = gb.chain(root, [(rule, R0), ("or_r2", R0)])
    gb.back(top, root)
    return gb.build()


def double() -> ProofGraph:
    """``Nat |- Nat`` computing ``n -> 2n`` by recursion on the antecedent."""
    gb = GraphBuilder(SystemId.MuLK, "double", {"Nat": NAT})
    root = gb.start(Sequent((NAT,), (NAT,)))
    (h,) = gb.apply(root, "mu_l", L0)
    zero, succ = gb.apply(h, "or_l", L0)
    top = gb.chain(zero, [("mu_r", R0), ("or_r1", R0)])
    gb.apply(top, "ax")
    top = gb.chain(succ, [("mu_r", R0), ("or_r2", R0), ("mu_r", R0), ("or_r2", R0)])
    gb.back(top, root)
    return gb.build()


def apply_double(n: int) -> ProofGraph:
    """``|- Nat``: the numeral ``n`` cut against :func:`double`."""
    gb = GraphBuilder(SystemId.MuLK, f"double_{n}", {"Nat": NAT})
    root = gb.start(Sequent((), (NAT,)))
    left, right = gb.apply(root, "cut", formula=NAT, split=(1,))
    _grow_numeral(gb, left, n)
    (h,) = gb.apply(right, "mu_l", L0)
    zero, succ = gb.apply(h, "or_l", L0)
    top = gb.chain(zero, [("mu_r", R0), ("or_r1", R0)])
    gb.apply(top, "ax")
    top = gb.chain(succ, [("mu_r", R0), ("or_r2", R0), ("mu_r", R0), ("or_r2", R0)])
    gb.back(top, right)
    return gb.build()


def example_corpus() -> dict[str, ProofGraph]:
    """The six named example proofs."""
    return {
        "example_circular": example_circular(),
        "inconsistent_loop": inconsistent_loop(),
        "pi_inf": omega_numeral("mu"),
        "conat_inf": omega_numeral("nu"),
        "double": double(),
        "numeral_2": numeral(2),
    }
