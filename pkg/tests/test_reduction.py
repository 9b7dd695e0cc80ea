import random

from hypothesis import given, seed, settings, strategies as st

from mucut.calculus import Sequent
from mucut.corpus import NAT, apply_double, example_circular, numeral, inconsistent_loop
from mucut.formula import Atom, Bang, Quest, SystemId, Top, With
from mucut.proof import GraphBuilder, prefix_suspensions
from mucut.reduction import (CUT_FREE, FairReducer, MNode, RNode, check_tree, enumerate_redexes,
                             fair_reduce, reduce, residuals_after, view, working_tree)
from mucut.translate import lin_proof
from oracles import SEED, numeral_tree, strip_refs

a, b = Atom("a"), Atom("b")
R0, L0 = ("R", 0), ("L", 0)


def _kinds(t):
    return sorted((r.kind, r.rules) for r in enumerate_redexes(t))


def _fire(t, kind):
    (r,) = [r for r in enumerate_redexes(t) if r.kind == kind]
    return reduce(t, r), r


def ax_against_top():
    gb = GraphBuilder(SystemId.MALL)
    l, r = gb.apply(gb.start(Sequent((a,), (Top,))), "cut", formula=a, split=(0, 1))
    gb.apply(l, "ax")
    gb.apply(r, "top_r", R0)
    return working_tree(gb.build())


def ax_against_with():
    gb = GraphBuilder(SystemId.MALL)
    l, r = gb.apply(gb.start(Sequent((a,), (With(Top, Top),))), "cut", formula=a, split=(0, 1))
    gb.apply(l, "ax")
    x, y = gb.apply(r, "with_r", R0)
    gb.apply(x, "top_r", R0)
    gb.apply(y, "top_r", R0)
    return working_tree(gb.build())


def test_axiom_and_erasure():
    t = ax_against_top()
    assert _kinds(t) == [("Axiom", ("ax",)), ("Commutative", ("top_r",))]
    n, _ = _fire(t, "Axiom")
    assert isinstance(view(n), MNode) and view(n).mcut.arity == 1
    n, _ = _fire(t, "Commutative")
    v = view(n)
    assert isinstance(v, RNode) and v.app.rule == "top_r" and v.children == ()
    assert v.conclusion == Sequent((a,), (Top,))


def test_with_commutation_duplicates_context():
    t = ax_against_with()
    n, _ = _fire(t, "Commutative")
    v = view(n)
    assert v.app.rule == "with_r"
    assert [type(c) for c in v.children] == [MNode, MNode]
    assert all(c.mcut.arity == 2 and c.conclusion == Sequent((a,), (Top,)) for c in v.children)
    assert check_tree(n) == []


def test_residuals():
    t = ax_against_with()
    rs = {r.kind: r for r in enumerate_redexes(t)}
    assert len(residuals_after(t, rs["Commutative"], rs["Axiom"])) == 2
    assert len(residuals_after(t, rs["Axiom"], rs["Commutative"])) == 1
    assert residuals_after(t, rs["Axiom"], rs["Axiom"]) == set()
    t = ax_against_top()
    rs = {r.kind: r for r in enumerate_redexes(t)}
    assert residuals_after(t, rs["Commutative"], rs["Axiom"]) == set()


def test_principal_fixpoint_pair():
    t = working_tree(inconsistent_loop())
    assert _kinds(t) == [("Principal", ("nu_r", "nu_l"))]
    n, _ = _fire(t, "Principal")
    v = view(n)
    assert isinstance(v, MNode)
    assert [view(c).app.rule for c in v.children] == ["nu_r", "nu_l"]
    assert check_tree(n) == []


def test_key_exponential():
    gb = GraphBuilder(SystemId.MuLLBox)
    l, r = gb.apply(gb.start(Sequent((), (Quest(Top),))), "cut", formula=Quest(Top), split=(1,))
    gb.apply(gb.chain(l, [("wn_d", R0)]), "top_r", R0)
    gb.apply(gb.chain(r, [("wn_p_box", L0), ("wn_d", R0)]), "top_r", R0)
    t = working_tree(gb.build())
    assert _kinds(t) == [("KeyExp", ("wn_d", "wn_p_box"))]
    n, _ = _fire(t, "KeyExp")
    v = view(n)
    assert [c.conclusion for c in v.children] == [Sequent((), (Top,)), Sequent((Top,), (Quest(Top),))]
    assert check_tree(n) == []


def test_weakening_erases_promotion():
    gb = GraphBuilder(SystemId.MuLLBox)
    l, r = gb.apply(gb.start(Sequent((Bang(b),), (Quest(Top),))), "cut", formula=Bang(Top), split=(0, 1))
    gb.apply(gb.chain(l, [("oc_p", R0)]), "top_r", R0)
    gb.apply(gb.chain(r, [("oc_w", L0), ("wn_d", R0)]), "top_r", R0)
    t = working_tree(gb.build())
    assert _kinds(t) == [("StructPrincipal", ("oc_w",))]
    n, _ = _fire(t, "StructPrincipal")
    v = view(n)
    assert v.app.rule == "oc_w" and v.conclusion == Sequent((Bang(b),), (Quest(Top),))
    (c,) = v.children
    assert isinstance(c, MNode) and c.mcut.arity == 1
    assert check_tree(n) == []


def test_cut_free_input_is_done():
    prefix, trace, status = fair_reduce(numeral(2), fuel=10, depth=5)
    assert status == CUT_FREE and len(trace) == 0


def test_double_one_gives_two():
    prefix, trace, status = fair_reduce(apply_double(1), fuel=2000, depth=8)
    assert status == CUT_FREE
    assert prefix_suspensions(prefix) == []
    assert strip_refs(prefix) == numeral_tree(2, NAT)


def test_fair_reduce_example_cut_free_prefix():
    prefix, trace, status = fair_reduce(example_circular(), fuel=200, depth=4)
    assert status == CUT_FREE
    assert all(e.endsequent == trace.entries[0].endsequent for e in trace.entries)
    assert all(line.startswith(f"step {i}: ") for i, line in enumerate(trace.lines()))


def test_fair_reducer_fires_oldest():
    red = FairReducer(working_tree(lin_proof(example_circular())))
    for _ in range(60):
        cands = red.frontier()
        oldest = min(red.stamp[k] for k, _ in cands)
        before = red.steps
        red.step()
        assert red.trace.entries[-1].age == before - oldest


@seed(SEED)
@settings(max_examples=15)
@given(st.integers(0, 2 ** 31))
def test_random_orders_keep_shape(k):
    rng = random.Random(k)
    t = working_tree(lin_proof(example_circular()))
    end = view(t).conclusion
    for _ in range(25):
        rs = enumerate_redexes(t, 6)
        if not rs:
            break
        t = reduce(t, rng.choice(rs))
        assert view(t).conclusion == end
        assert check_tree(t) == []
